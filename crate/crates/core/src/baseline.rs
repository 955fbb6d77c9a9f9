//! Classical selectivity-based cardinality estimation.
//!
//! Per-predicate selectivities come from the catalog alone:
//!
//! * equality: `(1 - null_frac) / num_unique` (with `num_unique <= 1`
//!   treated as 1, i.e. all non-NULL rows);
//! * range operators: mass of the equi-depth histogram on the qualifying
//!   side of the constant, linearly interpolated within the bucket the
//!   constant falls into, times `(1 - null_frac)`. The continuous
//!   approximation does not distinguish strict from inclusive bounds;
//! * BETWEEN: difference of the two cumulative masses, times
//!   `(1 - null_frac)`;
//! * IS NULL: `null_frac`; IS NOT NULL: `1 - null_frac`.
//!
//! Conjunctions multiply selectivities (attribute-value independence), and a
//! join is estimated as the *larger* side's filtered scan estimate with no
//! further adjustment — deliberately primitive, because this estimator is
//! the reference point the learned models are measured against. Estimates
//! are scan selectivity times row count, clamped to `[0, rows]`; they may
//! legitimately fall below one row.

use crate::data::{ColumnType, Literal};
use crate::stats::{ColumnStats, StatsCatalog, TableCatalog};
use crate::workload::{Predicate, PredOp, QuerySpec, ScanSpec};
use crate::{Error, Result};

/// Cumulative fraction of non-NULL values at or below `c` according to the
/// 101-boundary equi-depth histogram: each of the 100 buckets contributes
/// its full 1/100 when `c` clears its upper boundary, a linear share when
/// `c` falls inside it, and nothing otherwise.
pub fn histogram_mass_below(percentiles: &[f64], c: f64) -> f64 {
    let buckets = percentiles.len() - 1;
    let mut mass = 0.0;
    for k in 0..buckets {
        let lo = percentiles[k];
        let hi = percentiles[k + 1];
        if c >= hi {
            mass += 1.0;
        } else if c > lo {
            // hi > c > lo implies hi > lo, so the division is safe.
            mass += (c - lo) / (hi - lo);
        }
    }
    mass / buckets as f64
}

/// Selectivity of one predicate from column statistics alone, in [0, 1].
pub fn predicate_selectivity(stats: &ColumnStats, pred: &Predicate) -> Result<f64> {
    let nf = stats.null_frac;
    let sel = match pred.op {
        PredOp::IsNull => nf,
        PredOp::IsNotNull => 1.0 - nf,
        PredOp::Eq => {
            if stats.num_unique <= 1 {
                1.0 - nf
            } else {
                (1.0 - nf) / stats.num_unique as f64
            }
        }
        PredOp::Gt | PredOp::Lt | PredOp::Ge | PredOp::Le => {
            let c = numeric_constant(stats, &pred.constants[0], &pred.column)?;
            match stats.numeric_percentiles() {
                None => 0.0, // all-NULL column: no value can match
                Some(ps) => {
                    let below = histogram_mass_below(ps, c);
                    let frac = match pred.op {
                        PredOp::Lt | PredOp::Le => below,
                        _ => 1.0 - below,
                    };
                    frac * (1.0 - nf)
                }
            }
        }
        PredOp::Between => {
            let lo = numeric_constant(stats, &pred.constants[0], &pred.column)?;
            let hi = numeric_constant(stats, &pred.constants[1], &pred.column)?;
            match stats.numeric_percentiles() {
                None => 0.0,
                Some(ps) => {
                    let span = histogram_mass_below(ps, hi) - histogram_mass_below(ps, lo);
                    span.max(0.0) * (1.0 - nf)
                }
            }
        }
    };
    Ok(sel.clamp(0.0, 1.0))
}

/// Extract the f64 value of a numeric range constant, rejecting strings.
fn numeric_constant(stats: &ColumnStats, lit: &Literal, column: &str) -> Result<f64> {
    if stats.data_type == ColumnType::Str {
        return Err(Error::TypeMismatch(format!(
            "range predicate on string column `{column}` is not supported"
        )));
    }
    match lit {
        Literal::Int(v) => Ok(*v as f64),
        Literal::Float(v) => Ok(*v),
        Literal::Str(_) => Err(Error::TypeMismatch(format!(
            "numeric column `{column}` compared against a string constant"
        ))),
    }
}

/// Combined selectivity of a scan's conjunction: product of the predicate
/// selectivities (independence assumption), 1.0 for an empty predicate list.
pub fn scan_selectivity(table: &TableCatalog, scan: &ScanSpec) -> Result<f64> {
    let mut sel = 1.0;
    for pred in &scan.predicates {
        sel *= predicate_selectivity(table.column(&pred.column)?, pred)?;
    }
    Ok(sel.clamp(0.0, 1.0))
}

/// Estimated result rows of one filtered scan.
pub fn scan_estimate(table: &TableCatalog, scan: &ScanSpec) -> Result<f64> {
    Ok(table.rows as f64 * scan_selectivity(table, scan)?)
}

/// Estimate the cardinality of a query.
///
/// Single-table: rows times conjunction selectivity. Join: the larger side's
/// filtered scan estimate, verbatim (row-count ties pick the
/// lexicographically smaller table name).
pub fn estimate(catalog: &StatsCatalog, spec: &QuerySpec) -> Result<f64> {
    spec.validate()?;
    if spec.join.is_none() {
        let table = catalog.table(&spec.scans[0].table)?;
        return scan_estimate(table, &spec.scans[0]);
    }
    let t0 = catalog.table(&spec.scans[0].table)?;
    let t1 = catalog.table(&spec.scans[1].table)?;
    let larger = if t0.rows != t1.rows {
        if t0.rows > t1.rows { 0 } else { 1 }
    } else if t0.table <= t1.table {
        0
    } else {
        1
    };
    let (table, scan) = if larger == 0 {
        (t0, &spec.scans[0])
    } else {
        (t1, &spec.scans[1])
    };
    scan_estimate(table, scan)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{Column, ColumnData, Table};
    use crate::workload::JoinSpec;

    /// 200-row table: `u` uniform 0..=100 via a ramp (i % 101), `s` strings,
    /// `n` has 25% NULLs.
    fn catalog() -> StatsCatalog {
        let t = Table::new(
            "t",
            vec![
                Column::new("u", ColumnData::Int((0..200).map(|i| Some(i % 101)).collect())),
                Column::new(
                    "s",
                    ColumnData::Str((0..200).map(|i| Some(format!("w{:02}", i % 40))).collect()),
                ),
                Column::new(
                    "n",
                    ColumnData::Int((0..200).map(|i| (i % 4 != 0).then_some(i % 10)).collect()),
                ),
            ],
        )
        .unwrap();
        let ds = crate::data::Dataset::new("d", vec![t]).unwrap();
        StatsCatalog::compute(&ds).unwrap()
    }

    fn pred(column: &str, op: PredOp, constants: Vec<Literal>) -> Predicate {
        Predicate {
            column: column.into(),
            op,
            constants,
        }
    }

    #[test]
    fn equality_selectivity_is_inverse_distinct_count() {
        let catalog = catalog();
        let stats = catalog.column("t", "s").unwrap();
        let sel =
            predicate_selectivity(stats, &pred("s", PredOp::Eq, vec![Literal::Str("w00".into())]))
                .unwrap();
        assert!((sel - 1.0 / 40.0).abs() < 1e-12, "sel = {sel}");

        let stats = catalog.column("t", "n").unwrap();
        let sel = predicate_selectivity(stats, &pred("n", PredOp::Eq, vec![Literal::Int(3)])).unwrap();
        assert!((sel - 0.75 / 10.0).abs() < 1e-12, "NULLs shrink equality: {sel}");
    }

    #[test]
    fn range_selectivity_interpolates_histogram_mass() {
        let catalog = catalog();
        let stats = catalog.column("t", "u").unwrap();
        // `u` is near-uniform on [0, 100]: mass below c tracks c/100.
        for (c, expect) in [(0, 0.0), (25, 0.25), (50, 0.5), (100, 1.0)] {
            let sel =
                predicate_selectivity(stats, &pred("u", PredOp::Lt, vec![Literal::Int(c)])).unwrap();
            assert!(
                (sel - expect).abs() < 0.02,
                "mass below {c}: {sel} vs {expect}"
            );
        }
        let lt = predicate_selectivity(stats, &pred("u", PredOp::Lt, vec![Literal::Int(30)])).unwrap();
        let gt = predicate_selectivity(stats, &pred("u", PredOp::Gt, vec![Literal::Int(30)])).unwrap();
        assert!((lt + gt - 1.0).abs() < 1e-12, "complementary ranges sum to 1");
    }

    #[test]
    fn between_selectivity_is_difference_of_masses() {
        let catalog = catalog();
        let stats = catalog.column("t", "u").unwrap();
        let sel = predicate_selectivity(
            stats,
            &pred("u", PredOp::Between, vec![Literal::Int(20), Literal::Int(60)]),
        )
        .unwrap();
        assert!((sel - 0.4).abs() < 0.02, "sel = {sel}");
    }

    #[test]
    fn null_test_selectivities_mirror_null_frac() {
        let catalog = catalog();
        let stats = catalog.column("t", "n").unwrap();
        let is_null = predicate_selectivity(stats, &pred("n", PredOp::IsNull, vec![])).unwrap();
        let not_null = predicate_selectivity(stats, &pred("n", PredOp::IsNotNull, vec![])).unwrap();
        assert!((is_null - 0.25).abs() < 1e-12);
        assert!((not_null - 0.75).abs() < 1e-12);
    }

    #[test]
    fn conjunctions_multiply_and_joins_take_the_larger_side() {
        let dim = Table::new(
            "dim",
            vec![Column::new("id", ColumnData::Int((0..20).map(Some).collect()))],
        )
        .unwrap();
        let fact = Table::new(
            "fact",
            vec![
                Column::new("dim_fk", ColumnData::Int((0..200).map(|i| Some(i % 20)).collect())),
                Column::new("v", ColumnData::Int((0..200).map(|i| Some(i % 8)).collect())),
            ],
        )
        .unwrap();
        let ds = crate::data::Dataset::new("d", vec![dim, fact]).unwrap();
        let catalog = StatsCatalog::compute(&ds).unwrap();
        let spec = QuerySpec {
            scans: vec![
                ScanSpec {
                    table: "dim".into(),
                    predicates: vec![pred("id", PredOp::Eq, vec![Literal::Int(3)])],
                },
                ScanSpec {
                    table: "fact".into(),
                    predicates: vec![
                        pred("dim_fk", PredOp::Eq, vec![Literal::Int(3)]),
                        pred("v", PredOp::Eq, vec![Literal::Int(1)]),
                    ],
                },
            ],
            join: Some(JoinSpec {
                left_table: "dim".into(),
                left_column: "id".into(),
                right_table: "fact".into(),
                right_column: "dim_fk".into(),
            }),
        };
        let est = estimate(&catalog, &spec).unwrap();
        // Larger side is fact: 200 * (1/20) * (1/8); the dim filter is
        // ignored by construction.
        assert!((est - 200.0 / 160.0).abs() < 1e-9, "est = {est}");
    }
}
