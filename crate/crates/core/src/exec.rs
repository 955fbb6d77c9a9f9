//! Exact COUNT(*) execution over in-memory columns.
//!
//! This is the labeling engine: every workload query is answered exactly
//! here, with SQL semantics for NULL (a NULL never satisfies a comparison
//! and never matches a join key; only IS NULL selects it).
//!
//! Scans evaluate one predicate per pass over a selection bitmap; joins hash
//! the smaller filtered side and probe with the larger. The execution budget
//! is defined in *rows visited*, a deterministic quantity: each predicate
//! pass visits `row_count` rows, the join build visits the selected build
//! rows, and the probe visits the selected probe rows. Whenever the running
//! total exceeds the budget the query is abandoned and reported as a timeout
//! (no cardinality). Identical budgets therefore time out identically on
//! every run and every machine.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::data::{ColumnData, Dataset, Literal, Table};
use crate::workload::{Predicate, PredOp, QuerySpec, RecordStatus, WorkloadRecord};
use crate::{Error, Result};

/// Outcome of executing one query.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExecOutcome {
    /// Exact COUNT(*), or None if the budget was exceeded.
    pub cardinality: Option<u64>,
    /// Rows visited before finishing or giving up.
    pub rows_visited: u64,
}

/// Dense row-selection bitmap with 64-bit words.
#[derive(Debug, Clone)]
pub struct Bitmap {
    words: Vec<u64>,
    len: usize,
}

impl Bitmap {
    pub fn all_set(len: usize) -> Self {
        let mut words = vec![u64::MAX; len.div_ceil(64)];
        if len % 64 != 0 {
            if let Some(last) = words.last_mut() {
                *last = (1u64 << (len % 64)) - 1;
            }
        }
        Bitmap { words, len }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn clear(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i / 64] &= !(1u64 << (i % 64));
    }

    pub fn and_with(&mut self, other: &Bitmap) {
        debug_assert_eq!(self.len, other.len);
        for (w, o) in self.words.iter_mut().zip(&other.words) {
            *w &= o;
        }
    }

    /// Population count: number of selected rows.
    pub fn count(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    /// Iterate indices of set bits in ascending order.
    pub fn iter_set(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut rem = w;
            std::iter::from_fn(move || {
                if rem == 0 {
                    None
                } else {
                    let bit = rem.trailing_zeros() as usize;
                    rem &= rem - 1;
                    Some(wi * 64 + bit)
                }
            })
        })
    }
}

/// Evaluate one predicate over a full column, clearing non-matching rows from
/// the selection. NULL satisfies only IS NULL.
fn apply_predicate(table: &Table, pred: &Predicate, selection: &mut Bitmap) -> Result<()> {
    let col = table.column(&pred.column)?;
    let mismatch = || {
        Error::TypeMismatch(format!(
            "predicate on `{}`.`{}` ({:?}) has constants of the wrong type",
            table.name(),
            pred.column,
            col.column_type()
        ))
    };
    match pred.op {
        PredOp::IsNull => {
            for i in 0..table.row_count() {
                if !col.data.is_null(i) {
                    selection.clear(i);
                }
            }
            return Ok(());
        }
        PredOp::IsNotNull => {
            for i in 0..table.row_count() {
                if col.data.is_null(i) {
                    selection.clear(i);
                }
            }
            return Ok(());
        }
        _ => {}
    }

    // Value comparisons: NULL rows never match.
    match (&col.data, &pred.constants[0]) {
        (ColumnData::Int(v), Literal::Int(_)) => {
            let get = |lit: &Literal| -> Result<i64> {
                match lit {
                    Literal::Int(x) => Ok(*x),
                    _ => Err(mismatch()),
                }
            };
            let c0 = get(&pred.constants[0])?;
            let c1 = if pred.op == PredOp::Between {
                get(&pred.constants[1])?
            } else {
                c0
            };
            for (i, x) in v.iter().enumerate() {
                let keep = match x {
                    None => false,
                    Some(x) => compare(pred.op, *x, c0, c1),
                };
                if !keep {
                    selection.clear(i);
                }
            }
        }
        (ColumnData::Float(v), Literal::Float(_)) => {
            let get = |lit: &Literal| -> Result<f64> {
                match lit {
                    Literal::Float(x) => Ok(*x),
                    _ => Err(mismatch()),
                }
            };
            let c0 = get(&pred.constants[0])?;
            let c1 = if pred.op == PredOp::Between {
                get(&pred.constants[1])?
            } else {
                c0
            };
            for (i, x) in v.iter().enumerate() {
                let keep = match x {
                    None => false,
                    Some(x) => compare(pred.op, *x, c0, c1),
                };
                if !keep {
                    selection.clear(i);
                }
            }
        }
        (ColumnData::Str(v), Literal::Str(c0)) => {
            if pred.op != PredOp::Eq {
                return Err(Error::TypeMismatch(format!(
                    "string column `{}`.`{}` supports only equality and NULL tests",
                    table.name(),
                    pred.column
                )));
            }
            for (i, x) in v.iter().enumerate() {
                let keep = matches!(x, Some(x) if x == c0);
                if !keep {
                    selection.clear(i);
                }
            }
        }
        _ => return Err(mismatch()),
    }
    Ok(())
}

fn compare<T: PartialOrd + Copy>(op: PredOp, x: T, c0: T, c1: T) -> bool {
    match op {
        PredOp::Eq => x == c0,
        PredOp::Gt => x > c0,
        PredOp::Lt => x < c0,
        PredOp::Ge => x >= c0,
        PredOp::Le => x <= c0,
        PredOp::Between => x >= c0 && x <= c1,
        PredOp::IsNull | PredOp::IsNotNull => unreachable!("handled before comparison"),
    }
}

/// Join key: i64 directly, f64 by bit pattern (finite values only, so bit
/// equality is value equality; -0.0 is folded onto 0.0), strings by value.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Key<'a> {
    I(i64),
    F(u64),
    S(&'a str),
}

fn key_at<'a>(data: &'a ColumnData, i: usize) -> Option<Key<'a>> {
    match data {
        ColumnData::Int(v) => v[i].map(Key::I),
        ColumnData::Float(v) => v[i].map(|x| Key::F((if x == 0.0 { 0.0 } else { x }).to_bits())),
        ColumnData::Str(v) => v[i].as_deref().map(Key::S),
    }
}

/// Budget bookkeeping: add `cost`, fail with a timeout if the total passes
/// the cap.
struct Meter {
    visited: u64,
    budget: Option<u64>,
}

impl Meter {
    fn charge(&mut self, cost: u64) -> bool {
        self.visited = self.visited.saturating_add(cost);
        match self.budget {
            Some(cap) => self.visited <= cap,
            None => true,
        }
    }
}

/// Execute one COUNT(*) query exactly.
pub fn execute(dataset: &Dataset, spec: &QuerySpec, budget: Option<u64>) -> Result<ExecOutcome> {
    spec.validate()?;
    let mut meter = Meter {
        visited: 0,
        budget,
    };

    let mut selections = Vec::with_capacity(spec.scans.len());
    for scan in &spec.scans {
        let table = dataset.table(&scan.table)?;
        let mut selection = Bitmap::all_set(table.row_count());
        for pred in &scan.predicates {
            if !meter.charge(table.row_count() as u64) {
                return Ok(ExecOutcome {
                    cardinality: None,
                    rows_visited: meter.visited,
                });
            }
            apply_predicate(table, pred, &mut selection)?;
        }
        selections.push(selection);
    }

    let Some(join) = &spec.join else {
        return Ok(ExecOutcome {
            cardinality: Some(selections[0].count()),
            rows_visited: meter.visited,
        });
    };

    let left_table = dataset.table(&join.left_table)?;
    let right_table = dataset.table(&join.right_table)?;
    let left_col = &left_table.column(&join.left_column)?.data;
    let right_col = &right_table.column(&join.right_column)?.data;
    if left_col.column_type() != right_col.column_type() {
        return Err(Error::TypeMismatch(format!(
            "join keys `{}`.`{}` and `{}`.`{}` have different types",
            join.left_table, join.left_column, join.right_table, join.right_column
        )));
    }

    // Build on the smaller filtered side, probe with the larger.
    let left_selected = selections[0].count();
    let right_selected = selections[1].count();
    let (build_col, build_sel, probe_col, probe_sel, build_rows, probe_rows) =
        if left_selected <= right_selected {
            (left_col, &selections[0], right_col, &selections[1], left_selected, right_selected)
        } else {
            (right_col, &selections[1], left_col, &selections[0], right_selected, left_selected)
        };

    if !meter.charge(build_rows) {
        return Ok(ExecOutcome {
            cardinality: None,
            rows_visited: meter.visited,
        });
    }
    let mut built: HashMap<Key, u64> = HashMap::with_capacity(build_rows as usize);
    for i in build_sel.iter_set() {
        if let Some(key) = key_at(build_col, i) {
            *built.entry(key).or_insert(0) += 1;
        }
    }

    if !meter.charge(probe_rows) {
        return Ok(ExecOutcome {
            cardinality: None,
            rows_visited: meter.visited,
        });
    }
    let mut total = 0u64;
    for i in probe_sel.iter_set() {
        if let Some(key) = key_at(probe_col, i) {
            if let Some(count) = built.get(&key) {
                total += count;
            }
        }
    }

    Ok(ExecOutcome {
        cardinality: Some(total),
        rows_visited: meter.visited,
    })
}

/// Label every pending record of a workload in place: exact cardinalities,
/// rows visited, and the final status (`ok`, `zero`, or `timeout`).
/// Execution runs in parallel; results are written back in record order, so
/// output is deterministic.
pub fn label_workload(
    dataset: &Dataset,
    records: &mut [WorkloadRecord],
    budget: Option<u64>,
) -> Result<()> {
    let outcomes: Vec<Option<Result<ExecOutcome>>> = records
        .par_iter()
        .map(|r| {
            (r.status == RecordStatus::Pending).then(|| execute(dataset, &r.spec, budget))
        })
        .collect();
    for (record, outcome) in records.iter_mut().zip(outcomes) {
        let Some(outcome) = outcome else { continue };
        let outcome = outcome?;
        record.rows_visited = Some(outcome.rows_visited);
        match outcome.cardinality {
            None => {
                record.status = RecordStatus::Timeout;
                record.label = None;
            }
            Some(0) => {
                record.status = RecordStatus::Zero;
                record.label = Some(0);
            }
            Some(c) => {
                record.status = RecordStatus::Ok;
                record.label = Some(c);
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{Column, Table};
    use crate::workload::{JoinSpec, ScanSpec};

    fn demo_dataset() -> Dataset {
        let dim = Table::new(
            "dim",
            vec![
                Column::new("id", ColumnData::Int((0..4).map(Some).collect())),
                Column::new(
                    "tag",
                    ColumnData::Str(vec![
                        Some("red".into()),
                        Some("blue".into()),
                        None,
                        Some("red".into()),
                    ]),
                ),
            ],
        )
        .unwrap();
        let fact = Table::new(
            "fact",
            vec![
                Column::new(
                    "dim_fk",
                    ColumnData::Int(vec![Some(0), Some(0), Some(1), Some(3), None, Some(0)]),
                ),
                Column::new(
                    "x",
                    ColumnData::Float(vec![
                        Some(1.0),
                        Some(2.5),
                        Some(4.0),
                        None,
                        Some(9.0),
                        Some(2.5),
                    ]),
                ),
            ],
        )
        .unwrap();
        Dataset::new("demo", vec![dim, fact]).unwrap()
    }

    fn single(table: &str, predicates: Vec<Predicate>) -> QuerySpec {
        QuerySpec {
            scans: vec![ScanSpec {
                table: table.into(),
                predicates,
            }],
            join: None,
        }
    }

    #[test]
    fn scan_counts_respect_null_semantics() {
        let ds = demo_dataset();
        // x <= 2.5 matches rows 0, 1, 5; the NULL row never matches.
        let spec = single(
            "fact",
            vec![Predicate {
                column: "x".into(),
                op: PredOp::Le,
                constants: vec![Literal::Float(2.5)],
            }],
        );
        assert_eq!(execute(&ds, &spec, None).unwrap().cardinality, Some(3));

        let spec = single(
            "fact",
            vec![Predicate {
                column: "x".into(),
                op: PredOp::IsNull,
                constants: vec![],
            }],
        );
        assert_eq!(execute(&ds, &spec, None).unwrap().cardinality, Some(1));
    }

    #[test]
    fn between_is_inclusive_on_both_ends() {
        let ds = demo_dataset();
        let spec = single(
            "fact",
            vec![Predicate {
                column: "x".into(),
                op: PredOp::Between,
                constants: vec![Literal::Float(2.5), Literal::Float(4.0)],
            }],
        );
        assert_eq!(execute(&ds, &spec, None).unwrap().cardinality, Some(3));
    }

    #[test]
    fn join_multiplies_matching_rows_and_skips_null_keys() {
        let ds = demo_dataset();
        // dim.tag = 'red' keeps ids {0, 3}; fact rows with fk in {0, 3} are
        // rows 0, 1, 3, 5 (the NULL fk row never matches).
        let spec = QuerySpec {
            scans: vec![
                ScanSpec {
                    table: "dim".into(),
                    predicates: vec![Predicate {
                        column: "tag".into(),
                        op: PredOp::Eq,
                        constants: vec![Literal::Str("red".into())],
                    }],
                },
                ScanSpec {
                    table: "fact".into(),
                    predicates: vec![Predicate {
                        column: "x".into(),
                        op: PredOp::IsNotNull,
                        constants: vec![],
                    }],
                },
            ],
            join: Some(JoinSpec {
                left_table: "dim".into(),
                left_column: "id".into(),
                right_table: "fact".into(),
                right_column: "dim_fk".into(),
            }),
        };
        assert_eq!(execute(&ds, &spec, None).unwrap().cardinality, Some(3));
    }

    #[test]
    fn budget_exhaustion_reports_timeout_deterministically() {
        let ds = demo_dataset();
        let spec = single(
            "fact",
            vec![
                Predicate {
                    column: "x".into(),
                    op: PredOp::Gt,
                    constants: vec![Literal::Float(0.0)],
                },
                Predicate {
                    column: "x".into(),
                    op: PredOp::Lt,
                    constants: vec![Literal::Float(100.0)],
                },
            ],
        );
        // Two predicate passes over 6 rows cost 12; a budget of 11 fails on
        // the second pass, and one of 12 succeeds.
        let out = execute(&ds, &spec, Some(11)).unwrap();
        assert_eq!(out.cardinality, None);
        assert_eq!(out.rows_visited, 12, "charged before abandoning the pass");
        let out = execute(&ds, &spec, Some(12)).unwrap();
        assert_eq!(out.cardinality, Some(5));
        assert_eq!(out.rows_visited, 12);
    }

    #[test]
    fn bitmap_iter_set_matches_get() {
        let mut bm = Bitmap::all_set(130);
        for i in [0usize, 63, 64, 65, 128, 129] {
            bm.clear(i);
        }
        let set: Vec<usize> = bm.iter_set().collect();
        assert_eq!(set.len() as u64, bm.count());
        for &i in &set {
            assert!(bm.get(i));
        }
        assert!(!set.contains(&64));
        assert_eq!(bm.count(), 124);
    }
}
