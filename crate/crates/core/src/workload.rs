//! Query workload generation.
//!
//! Two families per dataset: single-table conjunctions with 1-4 filter
//! predicates, and binary pk-fk joins with 1-3 filter predicates per side.
//! Constants are drawn from the column's own percentile boundaries so
//! predicates land inside the data's range; string columns are restricted to
//! equality and NULL tests. Every draw flows from a per-dataset seed derived
//! from the master seed and the dataset name, so generation order across
//! datasets never matters.
//!
//! Queries are canonicalized (predicates sorted, join sides ordered by table
//! name) before duplicate detection. Records carry a lifecycle status:
//! `pending` after generation, then `ok`, `zero`, or `timeout` once labeled;
//! duplicates are marked at generation time. Only `ok` records feed training.

use std::collections::BTreeSet;

use rand::distr::weighted::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::data::{ColumnType, Literal};
use crate::stats::{StatValues, StatsCatalog};
use crate::{derive_seed, Error, Result};

/// Filter predicate operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PredOp {
    Eq,
    Gt,
    Lt,
    Ge,
    Le,
    Between,
    IsNull,
    IsNotNull,
}

impl PredOp {
    /// Number of constants the operator takes.
    pub fn arity(self) -> usize {
        match self {
            PredOp::IsNull | PredOp::IsNotNull => 0,
            PredOp::Between => 2,
            _ => 1,
        }
    }

    pub fn sql(self) -> &'static str {
        match self {
            PredOp::Eq => "=",
            PredOp::Gt => ">",
            PredOp::Lt => "<",
            PredOp::Ge => ">=",
            PredOp::Le => "<=",
            PredOp::Between => "BETWEEN",
            PredOp::IsNull => "IS NULL",
            PredOp::IsNotNull => "IS NOT NULL",
        }
    }
}

/// One filter predicate on a column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Predicate {
    pub column: String,
    pub op: PredOp,
    pub constants: Vec<Literal>,
}

impl Predicate {
    fn validate(&self) -> Result<()> {
        if self.constants.len() != self.op.arity() {
            return Err(Error::InvalidQuerySpec(format!(
                "operator {:?} takes {} constants, got {}",
                self.op,
                self.op.arity(),
                self.constants.len()
            )));
        }
        Ok(())
    }
}

/// Filtered scan of one table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanSpec {
    pub table: String,
    pub predicates: Vec<Predicate>,
}

/// Equi-join condition between the two scans of a join query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JoinSpec {
    pub left_table: String,
    pub left_column: String,
    pub right_table: String,
    pub right_column: String,
}

/// A COUNT(*) query: one filtered scan, or two scans joined on one condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuerySpec {
    pub scans: Vec<ScanSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub join: Option<JoinSpec>,
}

impl QuerySpec {
    pub fn validate(&self) -> Result<()> {
        match (&self.join, self.scans.len()) {
            (None, 1) => {}
            (Some(j), 2) => {
                if j.left_table != self.scans[0].table || j.right_table != self.scans[1].table {
                    return Err(Error::InvalidQuerySpec(
                        "join condition tables must match the two scans in order".to_string(),
                    ));
                }
            }
            (None, n) => {
                return Err(Error::InvalidQuerySpec(format!(
                    "single-table query must have exactly 1 scan, got {n}"
                )));
            }
            (Some(_), n) => {
                return Err(Error::InvalidQuerySpec(format!(
                    "join query must have exactly 2 scans, got {n}"
                )));
            }
        }
        for scan in &self.scans {
            for p in &scan.predicates {
                p.validate()?;
            }
        }
        Ok(())
    }

    /// Sort predicates (and for joins, the scan pair) into canonical order.
    pub fn canonicalize(&mut self) {
        if let Some(join) = &mut self.join {
            if join.left_table > join.right_table {
                std::mem::swap(&mut join.left_table, &mut join.right_table);
                std::mem::swap(&mut join.left_column, &mut join.right_column);
                self.scans.swap(0, 1);
            }
        }
        for scan in &mut self.scans {
            scan.predicates.sort_by(|a, b| {
                let ka = (&a.column, a.op, a.constants.iter().map(Literal::sort_key).collect::<Vec<_>>());
                let kb = (&b.column, b.op, b.constants.iter().map(Literal::sort_key).collect::<Vec<_>>());
                ka.cmp(&kb)
            });
        }
    }
}

/// Lifecycle status of a workload record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordStatus {
    /// Generated, not yet labeled.
    Pending,
    /// Labeled with a positive cardinality: usable for training/evaluation.
    Ok,
    /// Labeled and empty; excluded downstream.
    Zero,
    /// Canonical duplicate of an earlier record; excluded downstream.
    Duplicate,
    /// Exceeded the execution budget; excluded downstream.
    Timeout,
}

/// Workload family tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Single,
    Join,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::Single => "single",
            Family::Join => "join",
        }
    }
}

/// One generated query with its label and bookkeeping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkloadRecord {
    pub id: String,
    pub family: Family,
    pub spec: QuerySpec,
    pub sql: String,
    pub status: RecordStatus,
    /// True COUNT(*); present once executed (0 for `zero` records).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<u64>,
    /// Rows visited by the exact executor, for budget accounting.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rows_visited: Option<u64>,
    /// Classical estimator's prediction, filled by the baseline stage.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline_estimate: Option<f64>,
}

/// Operator weights for numeric columns. NULL-test weights are only consulted
/// for columns that actually contain NULLs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NumericOpWeights {
    pub eq: f64,
    pub gt: f64,
    pub lt: f64,
    pub ge: f64,
    pub le: f64,
    pub between: f64,
    pub is_null: f64,
    pub is_not_null: f64,
}

impl Default for NumericOpWeights {
    fn default() -> Self {
        NumericOpWeights {
            eq: 1.0,
            gt: 1.0,
            lt: 1.0,
            ge: 0.5,
            le: 0.5,
            between: 0.5,
            is_null: 0.2,
            is_not_null: 0.2,
        }
    }
}

/// Operator weights for string columns (equality and NULL tests only).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StringOpWeights {
    pub eq: f64,
    pub is_null: f64,
    pub is_not_null: f64,
}

impl Default for StringOpWeights {
    fn default() -> Self {
        StringOpWeights {
            eq: 1.0,
            is_null: 0.2,
            is_not_null: 0.2,
        }
    }
}

/// Workload generator configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GenConfig {
    /// Queries generated per dataset per family, before downstream filtering.
    pub queries_per_dataset: usize,
    /// Relative weights for drawing 1..=4 predicates on a single-table query.
    pub single_pred_weights: [f64; 4],
    /// Relative weights for drawing 1..=3 predicates on each join side.
    pub join_pred_weights: [f64; 3],
    pub numeric_op_weights: NumericOpWeights,
    pub string_op_weights: StringOpWeights,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            queries_per_dataset: 6000,
            single_pred_weights: [1.0, 1.0, 1.0, 1.0],
            join_pred_weights: [1.0, 1.0, 1.0],
            numeric_op_weights: NumericOpWeights::default(),
            string_op_weights: StringOpWeights::default(),
        }
    }
}

/// Maximum redraws for one query before generation gives up.
const MAX_ATTEMPTS: usize = 100;

struct ColumnDraw<'a> {
    name: &'a str,
    stats: &'a crate::stats::ColumnStats,
}

/// Generate one family of queries for a dataset described by its catalog.
///
/// `master_seed` is combined with the dataset name and family so that every
/// (dataset, family) pair owns an independent deterministic stream.
pub fn generate_workload(
    catalog: &StatsCatalog,
    family: Family,
    config: &GenConfig,
    master_seed: u64,
) -> Result<Vec<WorkloadRecord>> {
    let seed = derive_seed(master_seed, &format!("{}:{}", catalog.dataset, family.as_str()));
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut records = Vec::with_capacity(config.queries_per_dataset);
    let mut seen: BTreeSet<String> = BTreeSet::new();

    if matches!(family, Family::Join) && catalog.links.is_empty() {
        return Err(Error::NoJoinableLinks);
    }

    for idx in 0..config.queries_per_dataset {
        let mut spec = match family {
            Family::Single => gen_single(catalog, config, &mut rng)?,
            Family::Join => gen_join(catalog, config, &mut rng)?,
        };
        spec.canonicalize();
        spec.validate()?;
        let key = serde_json::to_string(&spec)?;
        let status = if seen.insert(key) {
            RecordStatus::Pending
        } else {
            RecordStatus::Duplicate
        };
        let sql = render_sql(&spec);
        records.push(WorkloadRecord {
            id: format!("{}:{}:{idx:06}", catalog.dataset, family.as_str()),
            family,
            spec,
            sql,
            status,
            label: None,
            rows_visited: None,
            baseline_estimate: None,
        });
    }
    Ok(records)
}

fn weighted_count(weights: &[f64], rng: &mut ChaCha12Rng) -> Result<usize> {
    let dist = WeightedIndex::new(weights).map_err(|e| {
        Error::InvalidQuerySpec(format!("bad predicate-count weights: {e}"))
    })?;
    Ok(dist.sample(rng) + 1)
}

fn gen_single(
    catalog: &StatsCatalog,
    config: &GenConfig,
    rng: &mut ChaCha12Rng,
) -> Result<QuerySpec> {
    let table = &catalog.tables[rng.random_range(0..catalog.tables.len())];
    let want = weighted_count(&config.single_pred_weights, rng)?;
    let predicates = draw_predicates(table, want, config, rng)?;
    Ok(QuerySpec {
        scans: vec![ScanSpec {
            table: table.table.clone(),
            predicates,
        }],
        join: None,
    })
}

fn gen_join(
    catalog: &StatsCatalog,
    config: &GenConfig,
    rng: &mut ChaCha12Rng,
) -> Result<QuerySpec> {
    let link = &catalog.links[rng.random_range(0..catalog.links.len())];
    let pk_side = catalog.table(&link.pk_table)?;
    let fk_side = catalog.table(&link.fk_table)?;
    let pk_want = weighted_count(&config.join_pred_weights, rng)?;
    let fk_want = weighted_count(&config.join_pred_weights, rng)?;
    let pk_preds = draw_predicates(pk_side, pk_want, config, rng)?;
    let fk_preds = draw_predicates(fk_side, fk_want, config, rng)?;
    Ok(QuerySpec {
        scans: vec![
            ScanSpec {
                table: link.pk_table.clone(),
                predicates: pk_preds,
            },
            ScanSpec {
                table: link.fk_table.clone(),
                predicates: fk_preds,
            },
        ],
        join: Some(JoinSpec {
            left_table: link.pk_table.clone(),
            left_column: link.pk_column.clone(),
            right_table: link.fk_table.clone(),
            right_column: link.fk_column.clone(),
        }),
    })
}

/// Draw up to `want` predicates on distinct columns of one table. Columns
/// with no usable operator (no value stats and no NULLs) are skipped; if
/// fewer eligible columns exist than requested, the count is clamped down.
fn draw_predicates(
    table: &crate::stats::TableCatalog,
    want: usize,
    config: &GenConfig,
    rng: &mut ChaCha12Rng,
) -> Result<Vec<Predicate>> {
    let eligibles: Vec<ColumnDraw> = table
        .columns
        .iter()
        .filter(|(_, s)| !matches!(s.values, StatValues::Absent) || s.null_frac > 0.0)
        .map(|(name, stats)| ColumnDraw { name, stats })
        .collect();
    if eligibles.is_empty() {
        return Err(Error::NoEligiblePredicates {
            table: table.table.clone(),
            attempts: 0,
        });
    }
    let want = want.min(eligibles.len());

    for attempt in 0..MAX_ATTEMPTS {
        // Sample `want` distinct columns by index.
        let mut picked = BTreeSet::new();
        while picked.len() < want {
            picked.insert(rng.random_range(0..eligibles.len()));
        }
        let mut preds = Vec::with_capacity(want);
        let mut ok = true;
        for &i in &picked {
            match draw_predicate(&eligibles[i], config, rng)? {
                Some(p) => preds.push(p),
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            return Ok(preds);
        }
        if attempt + 1 == MAX_ATTEMPTS {
            break;
        }
    }
    Err(Error::NoEligiblePredicates {
        table: table.table.clone(),
        attempts: MAX_ATTEMPTS,
    })
}

/// Draw one predicate for a column, or None if no operator is usable.
fn draw_predicate(
    col: &ColumnDraw,
    config: &GenConfig,
    rng: &mut ChaCha12Rng,
) -> Result<Option<Predicate>> {
    let has_values = !matches!(col.stats.values, StatValues::Absent);
    let has_nulls = col.stats.null_frac > 0.0;
    let mut ops: Vec<(PredOp, f64)> = Vec::new();
    match col.stats.data_type {
        ColumnType::Int | ColumnType::Float => {
            let w = &config.numeric_op_weights;
            if has_values {
                ops.extend([
                    (PredOp::Eq, w.eq),
                    (PredOp::Gt, w.gt),
                    (PredOp::Lt, w.lt),
                    (PredOp::Ge, w.ge),
                    (PredOp::Le, w.le),
                    (PredOp::Between, w.between),
                ]);
            }
            if has_nulls {
                ops.push((PredOp::IsNull, w.is_null));
                ops.push((PredOp::IsNotNull, w.is_not_null));
            }
        }
        ColumnType::Str => {
            let w = &config.string_op_weights;
            if has_values {
                ops.push((PredOp::Eq, w.eq));
            }
            if has_nulls {
                ops.push((PredOp::IsNull, w.is_null));
                ops.push((PredOp::IsNotNull, w.is_not_null));
            }
        }
    }
    ops.retain(|(_, w)| *w > 0.0);
    if ops.is_empty() {
        return Ok(None);
    }
    let dist = WeightedIndex::new(ops.iter().map(|(_, w)| *w)).map_err(|e| {
        Error::InvalidQuerySpec(format!("bad operator weights: {e}"))
    })?;
    let op = ops[dist.sample(rng)].0;

    let constants = match op.arity() {
        0 => Vec::new(),
        1 => vec![draw_constant(col, rng)?],
        2 => {
            let a = draw_constant(col, rng)?;
            let b = draw_constant(col, rng)?;
            order_pair(a, b)
        }
        _ => unreachable!(),
    };
    Ok(Some(Predicate {
        column: col.name.to_string(),
        op,
        constants,
    }))
}

/// Draw a constant uniformly from the column's percentile boundaries.
fn draw_constant(col: &ColumnDraw, rng: &mut ChaCha12Rng) -> Result<Literal> {
    match &col.stats.values {
        StatValues::Numeric { percentiles, .. } => {
            let v = percentiles[rng.random_range(0..percentiles.len())];
            Ok(match col.stats.data_type {
                ColumnType::Int => Literal::Int(v as i64),
                _ => Literal::Float(v),
            })
        }
        StatValues::Text { percentiles, .. } => {
            Ok(Literal::Str(percentiles[rng.random_range(0..percentiles.len())].clone()))
        }
        StatValues::Absent => Err(Error::InvalidQuerySpec(format!(
            "cannot draw a constant for all-NULL column `{}`",
            col.name
        ))),
    }
}

fn order_pair(a: Literal, b: Literal) -> Vec<Literal> {
    if a.sort_key() <= b.sort_key() {
        vec![a, b]
    } else {
        vec![b, a]
    }
}

/// Render a query spec as SQL text.
pub fn render_sql(spec: &QuerySpec) -> String {
    let mut clauses: Vec<String> = Vec::new();
    if let Some(join) = &spec.join {
        clauses.push(format!(
            "{}.{} = {}.{}",
            join.left_table, join.left_column, join.right_table, join.right_column
        ));
    }
    for scan in &spec.scans {
        for p in &scan.predicates {
            let lhs = format!("{}.{}", scan.table, p.column);
            let clause = match p.op {
                PredOp::IsNull | PredOp::IsNotNull => format!("{lhs} {}", p.op.sql()),
                PredOp::Between => format!(
                    "{lhs} BETWEEN {} AND {}",
                    render_literal(&p.constants[0]),
                    render_literal(&p.constants[1])
                ),
                _ => format!("{lhs} {} {}", p.op.sql(), render_literal(&p.constants[0])),
            };
            clauses.push(clause);
        }
    }
    let tables: Vec<&str> = spec.scans.iter().map(|s| s.table.as_str()).collect();
    format!(
        "SELECT COUNT(*) FROM {} WHERE {}",
        tables.join(", "),
        clauses.join(" AND ")
    )
}

fn render_literal(lit: &Literal) -> String {
    match lit {
        Literal::Int(v) => v.to_string(),
        Literal::Float(v) => v.to_string(),
        Literal::Str(s) => format!("'{}'", s.replace('\'', "''")),
    }
}

/// Serialize records as JSONL (one record per line).
pub fn records_to_jsonl(records: &[WorkloadRecord]) -> Result<String> {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r)?);
        out.push('\n');
    }
    Ok(out)
}

/// Parse records from JSONL.
pub fn records_from_jsonl(text: &str) -> Result<Vec<WorkloadRecord>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(Error::from))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonicalize_sorts_predicates_and_join_sides() {
        let mut spec = QuerySpec {
            scans: vec![
                ScanSpec {
                    table: "zeta".into(),
                    predicates: vec![
                        Predicate {
                            column: "b".into(),
                            op: PredOp::Gt,
                            constants: vec![Literal::Int(3)],
                        },
                        Predicate {
                            column: "a".into(),
                            op: PredOp::Eq,
                            constants: vec![Literal::Int(1)],
                        },
                    ],
                },
                ScanSpec {
                    table: "alpha".into(),
                    predicates: vec![Predicate {
                        column: "x".into(),
                        op: PredOp::IsNull,
                        constants: vec![],
                    }],
                },
            ],
            join: Some(JoinSpec {
                left_table: "zeta".into(),
                left_column: "id".into(),
                right_table: "alpha".into(),
                right_column: "z_fk".into(),
            }),
        };
        spec.canonicalize();
        assert_eq!(spec.scans[0].table, "alpha");
        assert_eq!(spec.join.as_ref().unwrap().left_table, "alpha");
        assert_eq!(spec.join.as_ref().unwrap().left_column, "z_fk");
        assert_eq!(spec.scans[1].predicates[0].column, "a");
        assert_eq!(spec.scans[1].predicates[1].column, "b");
        spec.validate().unwrap();
    }

    #[test]
    fn render_sql_formats_every_operator() {
        let spec = QuerySpec {
            scans: vec![ScanSpec {
                table: "t".into(),
                predicates: vec![
                    Predicate {
                        column: "a".into(),
                        op: PredOp::Ge,
                        constants: vec![Literal::Int(5)],
                    },
                    Predicate {
                        column: "b".into(),
                        op: PredOp::Between,
                        constants: vec![Literal::Float(1.5), Literal::Float(2.5)],
                    },
                    Predicate {
                        column: "s".into(),
                        op: PredOp::Eq,
                        constants: vec![Literal::Str("it's".into())],
                    },
                    Predicate {
                        column: "n".into(),
                        op: PredOp::IsNotNull,
                        constants: vec![],
                    },
                ],
            }],
            join: None,
        };
        assert_eq!(
            render_sql(&spec),
            "SELECT COUNT(*) FROM t WHERE t.a >= 5 AND t.b BETWEEN 1.5 AND 2.5 \
             AND t.s = 'it''s' AND t.n IS NOT NULL"
        );
    }

    #[test]
    fn join_sql_puts_join_condition_first() {
        let spec = QuerySpec {
            scans: vec![
                ScanSpec {
                    table: "a".into(),
                    predicates: vec![Predicate {
                        column: "x".into(),
                        op: PredOp::Lt,
                        constants: vec![Literal::Int(9)],
                    }],
                },
                ScanSpec {
                    table: "b".into(),
                    predicates: vec![Predicate {
                        column: "y".into(),
                        op: PredOp::IsNull,
                        constants: vec![],
                    }],
                },
            ],
            join: Some(JoinSpec {
                left_table: "a".into(),
                left_column: "id".into(),
                right_table: "b".into(),
                right_column: "a_fk".into(),
            }),
        };
        assert_eq!(
            render_sql(&spec),
            "SELECT COUNT(*) FROM a, b WHERE a.id = b.a_fk AND a.x < 9 AND b.y IS NULL"
        );
    }

    #[test]
    fn validate_rejects_wrong_constant_arity() {
        let spec = QuerySpec {
            scans: vec![ScanSpec {
                table: "t".into(),
                predicates: vec![Predicate {
                    column: "a".into(),
                    op: PredOp::Between,
                    constants: vec![Literal::Int(1)],
                }],
            }],
            join: None,
        };
        assert!(spec.validate().is_err());
    }
}
