//! Per-column statistics, pairwise correlations, and the dataset catalog.
//!
//! The catalog is the only thing the estimators ever see — models never touch
//! raw rows — so everything downstream (baseline selectivities, graph
//! features) is defined in terms of the records computed here.
//!
//! Percentile boundaries use the lower-interpolation convention: boundary `k`
//! of a column with `n` non-null values is `sorted[floor(k * (n - 1) / 100)]`
//! for `k` in `0..=100`, giving 101 boundaries that bracket 100 equi-depth
//! buckets. Correlations are Pearson over pairwise-complete rows; a pair is
//! flagged invalid when fewer than two complete rows exist or either side is
//! constant on the complete rows (zero variance), and invalid values must be
//! ignored by consumers.

use serde::{Deserialize, Serialize};

use crate::data::{Column, ColumnData, ColumnType, Dataset, float_order_key};
use crate::{Error, Result};

/// Number of percentile boundaries kept per column (inclusive endpoints).
pub const PERCENTILE_POINTS: usize = 101;

/// Ordered value summary for one column, by column family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum StatValues {
    Numeric {
        min: f64,
        max: f64,
        percentiles: Vec<f64>,
    },
    Text {
        min: String,
        max: String,
        percentiles: Vec<String>,
    },
    /// All values NULL: no value summary exists.
    Absent,
}

/// Statistics for a single column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnStats {
    pub data_type: ColumnType,
    /// Fraction of rows that are NULL, in [0, 1].
    pub null_frac: f64,
    /// Count of distinct non-NULL values.
    pub num_unique: u64,
    #[serde(flatten)]
    pub values: StatValues,
}

impl ColumnStats {
    /// Numeric percentile boundaries, if present.
    pub fn numeric_percentiles(&self) -> Option<&[f64]> {
        match &self.values {
            StatValues::Numeric { percentiles, .. } => Some(percentiles),
            _ => None,
        }
    }

    pub fn numeric_min_max(&self) -> Option<(f64, f64)> {
        match &self.values {
            StatValues::Numeric { min, max, .. } => Some((*min, *max)),
            _ => None,
        }
    }
}

/// Pearson correlation for one unordered numeric column pair of a table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationStat {
    pub column_a: String,
    pub column_b: String,
    /// Estimator name, recorded so catalog files are self-describing.
    pub method: String,
    /// In [-1, 1] when `validity`; meaningless otherwise.
    pub correlation: f64,
    pub validity: bool,
}

/// A discovered (or planted) pk-fk link.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PkFkLink {
    pub pk_table: String,
    pub pk_column: String,
    pub fk_table: String,
    pub fk_column: String,
}

/// Catalog entries for one table: row count, per-column stats in column
/// order, and correlations for every unordered numeric column pair.
#[derive(Debug, Clone, PartialEq)]
pub struct TableCatalog {
    pub table: String,
    pub rows: u64,
    pub columns: Vec<(String, ColumnStats)>,
    pub correlations: Vec<CorrelationStat>,
}

impl TableCatalog {
    pub fn column(&self, name: &str) -> Result<&ColumnStats> {
        self.columns
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, s)| s)
            .ok_or_else(|| Error::MissingStats {
                table: self.table.clone(),
                column: name.to_string(),
            })
    }

    /// Correlation record for an unordered column pair, if one was computed.
    pub fn correlation(&self, a: &str, b: &str) -> Option<&CorrelationStat> {
        self.correlations.iter().find(|c| {
            (c.column_a == a && c.column_b == b) || (c.column_a == b && c.column_b == a)
        })
    }
}

/// Full statistics catalog for a dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct StatsCatalog {
    pub dataset: String,
    pub tables: Vec<TableCatalog>,
    /// Filled in by link discovery; empty directly after stats computation.
    pub links: Vec<PkFkLink>,
}

impl StatsCatalog {
    /// Compute the catalog for a dataset (links left empty).
    pub fn compute(dataset: &Dataset) -> Result<Self> {
        let mut tables = Vec::with_capacity(dataset.tables().len());
        for table in dataset.tables() {
            let mut columns = Vec::with_capacity(table.columns().len());
            for col in table.columns() {
                columns.push((col.name.clone(), compute_column_stats(col)?));
            }
            let mut correlations = Vec::new();
            let numeric: Vec<&Column> = table
                .columns()
                .iter()
                .filter(|c| c.column_type().is_numeric())
                .collect();
            for i in 0..numeric.len() {
                for j in (i + 1)..numeric.len() {
                    let (r, valid) = pearson(&numeric[i].data, &numeric[j].data)?;
                    correlations.push(CorrelationStat {
                        column_a: numeric[i].name.clone(),
                        column_b: numeric[j].name.clone(),
                        method: "Pearson".to_string(),
                        correlation: r,
                        validity: valid,
                    });
                }
            }
            tables.push(TableCatalog {
                table: table.name().to_string(),
                rows: table.row_count() as u64,
                columns,
                correlations,
            });
        }
        Ok(StatsCatalog {
            dataset: dataset.name().to_string(),
            tables,
            links: Vec::new(),
        })
    }

    pub fn table(&self, name: &str) -> Result<&TableCatalog> {
        self.tables
            .iter()
            .find(|t| t.table == name)
            .ok_or_else(|| Error::UnknownTable(name.to_string()))
    }

    pub fn column(&self, table: &str, column: &str) -> Result<&ColumnStats> {
        self.table(table)?.column(column)
    }
}

/// Compute statistics for one column. The column must be non-empty; a column
/// whose values are all NULL yields `StatValues::Absent`.
pub fn compute_column_stats(col: &Column) -> Result<ColumnStats> {
    let n = col.len();
    if n == 0 {
        return Err(Error::EmptyColumn(col.name.clone()));
    }
    let nulls = col.data.null_count();
    let null_frac = nulls as f64 / n as f64;
    let data_type = col.column_type();

    let (num_unique, values) = match &col.data {
        ColumnData::Int(v) => {
            let mut xs: Vec<i64> = v.iter().flatten().copied().collect();
            xs.sort_unstable();
            let unique = count_sorted_unique(&xs, |a, b| a == b);
            if xs.is_empty() {
                (0, StatValues::Absent)
            } else {
                let ps = percentile_boundaries(&xs).iter().map(|&x| x as f64).collect();
                (
                    unique,
                    StatValues::Numeric {
                        min: xs[0] as f64,
                        max: xs[xs.len() - 1] as f64,
                        percentiles: ps,
                    },
                )
            }
        }
        ColumnData::Float(v) => {
            let mut xs: Vec<f64> = v.iter().flatten().copied().collect();
            xs.sort_unstable_by_key(|&x| float_order_key(x));
            let unique = count_sorted_unique(&xs, |a, b| a.to_bits() == b.to_bits());
            if xs.is_empty() {
                (0, StatValues::Absent)
            } else {
                (
                    unique,
                    StatValues::Numeric {
                        min: xs[0],
                        max: xs[xs.len() - 1],
                        percentiles: percentile_boundaries(&xs),
                    },
                )
            }
        }
        ColumnData::Str(v) => {
            let mut xs: Vec<&String> = v.iter().flatten().collect();
            xs.sort_unstable();
            let unique = count_sorted_unique(&xs, |a, b| a == b);
            if xs.is_empty() {
                (0, StatValues::Absent)
            } else {
                let ps = percentile_boundaries(&xs)
                    .into_iter()
                    .map(|s| s.clone())
                    .collect();
                (
                    unique,
                    StatValues::Text {
                        min: xs[0].clone(),
                        max: xs[xs.len() - 1].clone(),
                        percentiles: ps,
                    },
                )
            }
        }
    };

    Ok(ColumnStats {
        data_type,
        null_frac,
        num_unique,
        values,
    })
}

fn count_sorted_unique<T: Copy>(xs: &[T], eq: impl Fn(T, T) -> bool) -> u64 {
    if xs.is_empty() {
        return 0;
    }
    let mut count = 1u64;
    for w in xs.windows(2) {
        if !eq(w[0], w[1]) {
            count += 1;
        }
    }
    count
}

/// Equi-depth boundaries over an already-sorted non-empty slice: entry `k` is
/// `sorted[floor(k * (n - 1) / 100)]`.
fn percentile_boundaries<T: Copy>(sorted: &[T]) -> Vec<T> {
    let n = sorted.len();
    (0..PERCENTILE_POINTS)
        .map(|k| sorted[k * (n - 1) / (PERCENTILE_POINTS - 1)])
        .collect()
}

/// Pearson correlation of two numeric columns over pairwise-complete rows.
///
/// Returns `(r, validity)`. Invalid when fewer than two complete rows exist
/// or either side is constant on them (the exact-arithmetic zero-variance
/// case, detected as min == max). Valid values are clamped to [-1, 1]; the
/// exact quantity always lies there and only rounding can push it out.
pub fn pearson(a: &ColumnData, b: &ColumnData) -> Result<(f64, bool)> {
    if !a.column_type().is_numeric() || !b.column_type().is_numeric() {
        return Err(Error::TypeMismatch(
            "correlation requires two numeric columns".to_string(),
        ));
    }
    if a.len() != b.len() {
        return Err(Error::TypeMismatch(format!(
            "correlation requires equal-length columns ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    let at = |col: &ColumnData, i: usize| -> Option<f64> {
        match col {
            ColumnData::Int(v) => v[i].map(|x| x as f64),
            ColumnData::Float(v) => v[i],
            ColumnData::Str(_) => unreachable!("checked numeric above"),
        }
    };
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for i in 0..a.len() {
        if let (Some(x), Some(y)) = (at(a, i), at(b, i)) {
            xs.push(x);
            ys.push(y);
        }
    }
    let n = xs.len();
    if n < 2 {
        return Ok((0.0, false));
    }
    let (xmin, xmax) = min_max(&xs);
    let (ymin, ymax) = min_max(&ys);
    if xmin == xmax || ymin == ymax {
        return Ok((0.0, false));
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for i in 0..n {
        let dx = xs[i] - mx;
        let dy = ys[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    let denom = sxx.sqrt() * syy.sqrt();
    if denom == 0.0 {
        return Ok((0.0, false));
    }
    let r = (sxy / denom).clamp(-1.0, 1.0);
    Ok((r, true))
}

fn min_max(xs: &[f64]) -> (f64, f64) {
    let mut lo = xs[0];
    let mut hi = xs[0];
    for &x in xs {
        if x < lo {
            lo = x;
        }
        if x > hi {
            hi = x;
        }
    }
    (lo, hi)
}

// ---------------------------------------------------------------------------
// Catalog serialization: one JSON record per line, tagged by `kind`, in a
// fixed order (per table: table, columns, correlations; links last) so a
// recomputed catalog is byte-identical.
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum CatalogRecord {
    Dataset {
        dataset: String,
    },
    Table {
        table: String,
        rows: u64,
    },
    Column {
        table: String,
        column: String,
        #[serde(flatten)]
        stats: ColumnStats,
    },
    Correlation {
        table: String,
        #[serde(flatten)]
        stat: CorrelationStat,
    },
    Link(PkFkLink),
}

impl StatsCatalog {
    pub fn to_jsonl(&self) -> Result<String> {
        let mut out = String::new();
        let mut push = |rec: &CatalogRecord| -> Result<()> {
            out.push_str(&serde_json::to_string(rec)?);
            out.push('\n');
            Ok(())
        };
        push(&CatalogRecord::Dataset {
            dataset: self.dataset.clone(),
        })?;
        for t in &self.tables {
            push(&CatalogRecord::Table {
                table: t.table.clone(),
                rows: t.rows,
            })?;
            for (name, stats) in &t.columns {
                push(&CatalogRecord::Column {
                    table: t.table.clone(),
                    column: name.clone(),
                    stats: stats.clone(),
                })?;
            }
            for c in &t.correlations {
                push(&CatalogRecord::Correlation {
                    table: t.table.clone(),
                    stat: c.clone(),
                })?;
            }
        }
        for link in &self.links {
            push(&CatalogRecord::Link(link.clone()))?;
        }
        Ok(out)
    }

    pub fn from_jsonl(text: &str) -> Result<Self> {
        let mut dataset = String::new();
        let mut tables: Vec<TableCatalog> = Vec::new();
        let mut links = Vec::new();
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let rec: CatalogRecord = serde_json::from_str(line)?;
            match rec {
                CatalogRecord::Dataset { dataset: d } => dataset = d,
                CatalogRecord::Table { table, rows } => tables.push(TableCatalog {
                    table,
                    rows,
                    columns: Vec::new(),
                    correlations: Vec::new(),
                }),
                CatalogRecord::Column { table, column, stats } => {
                    let t = tables
                        .iter_mut()
                        .find(|t| t.table == table)
                        .ok_or_else(|| Error::UnknownTable(table.clone()))?;
                    t.columns.push((column, stats));
                }
                CatalogRecord::Correlation { table, stat } => {
                    let t = tables
                        .iter_mut()
                        .find(|t| t.table == table)
                        .ok_or_else(|| Error::UnknownTable(table.clone()))?;
                    t.correlations.push(stat);
                }
                CatalogRecord::Link(link) => links.push(link),
            }
        }
        Ok(StatsCatalog {
            dataset,
            tables,
            links,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Column;

    #[test]
    fn percentiles_of_0_to_100_are_identity() {
        let xs: Vec<Option<i64>> = (0..=100).map(Some).collect();
        let col = Column::new("a", ColumnData::Int(xs));
        let stats = compute_column_stats(&col).unwrap();
        let ps = stats.numeric_percentiles().unwrap();
        assert_eq!(ps.len(), PERCENTILE_POINTS);
        for (k, &p) in ps.iter().enumerate() {
            assert_eq!(p, k as f64, "boundary {k}");
        }
        assert_eq!(stats.num_unique, 101);
        assert_eq!(stats.null_frac, 0.0);
    }

    #[test]
    fn percentile_index_uses_lower_interpolation() {
        // n = 3: index for k is floor(k * 2 / 100) -> values 0,0,...,1,...,2.
        let col = Column::new("a", ColumnData::Int(vec![Some(30), Some(10), Some(20)]));
        let stats = compute_column_stats(&col).unwrap();
        let ps = stats.numeric_percentiles().unwrap();
        assert_eq!(ps[0], 10.0);
        assert_eq!(ps[49], 10.0, "floor(49 * 2 / 100) = 0");
        assert_eq!(ps[50], 20.0, "floor(50 * 2 / 100) = 1");
        assert_eq!(ps[99], 20.0);
        assert_eq!(ps[100], 30.0);
    }

    #[test]
    fn nulls_are_excluded_from_everything_but_null_frac() {
        let col = Column::new(
            "a",
            ColumnData::Int(vec![Some(5), None, Some(5), None, Some(7), None, None, None]),
        );
        let stats = compute_column_stats(&col).unwrap();
        assert_eq!(stats.null_frac, 5.0 / 8.0);
        assert_eq!(stats.num_unique, 2);
        assert_eq!(stats.numeric_min_max(), Some((5.0, 7.0)));
    }

    #[test]
    fn all_null_column_has_absent_values() {
        let col = Column::new("a", ColumnData::Float(vec![None, None, None]));
        let stats = compute_column_stats(&col).unwrap();
        assert_eq!(stats.null_frac, 1.0);
        assert_eq!(stats.num_unique, 0);
        assert_eq!(stats.values, StatValues::Absent);
    }

    #[test]
    fn string_stats_use_lexicographic_order() {
        let col = Column::new(
            "s",
            ColumnData::Str(vec![
                Some("pear".into()),
                Some("apple".into()),
                None,
                Some("fig".into()),
            ]),
        );
        let stats = compute_column_stats(&col).unwrap();
        match &stats.values {
            StatValues::Text { min, max, percentiles } => {
                assert_eq!(min, "apple");
                assert_eq!(max, "pear");
                assert_eq!(percentiles.len(), PERCENTILE_POINTS);
                assert_eq!(percentiles[0], "apple");
                assert_eq!(percentiles[100], "pear");
            }
            other => panic!("expected text stats, got {other:?}"),
        }
    }

    #[test]
    fn pearson_of_exact_linear_pair_is_one() {
        let x = ColumnData::Float((0..50).map(|i| Some(i as f64)).collect());
        let y = ColumnData::Float((0..50).map(|i| Some(3.0 * i as f64 - 7.0)).collect());
        let (r, valid) = pearson(&x, &y).unwrap();
        assert!(valid);
        assert!((r - 1.0).abs() < 1e-9, "r = {r}");
        let yneg = ColumnData::Float((0..50).map(|i| Some(-2.0 * i as f64)).collect());
        let (r, valid) = pearson(&x, &yneg).unwrap();
        assert!(valid);
        assert!((r + 1.0).abs() < 1e-9, "r = {r}");
    }

    #[test]
    fn pearson_uses_pairwise_complete_rows_only() {
        // Complete rows are (1,1),(2,2),(3,3): perfectly linear. The rows with
        // NULL on either side carry wildly different values and must not count.
        let x = ColumnData::Float(vec![Some(1.0), Some(2.0), Some(3.0), None, Some(999.0)]);
        let y = ColumnData::Float(vec![Some(1.0), Some(2.0), Some(3.0), Some(-55.0), None]);
        let (r, valid) = pearson(&x, &y).unwrap();
        assert!(valid);
        assert!((r - 1.0).abs() < 1e-12, "r = {r}");
    }

    #[test]
    fn pearson_degenerate_pairs_are_invalid() {
        let constant = ColumnData::Float(vec![Some(2.0); 10]);
        let ramp = ColumnData::Float((0..10).map(|i| Some(i as f64)).collect());
        assert_eq!(pearson(&constant, &ramp).unwrap().1, false, "zero variance");
        let one = ColumnData::Float(vec![Some(1.0), None]);
        let other = ColumnData::Float(vec![Some(2.0), None]);
        assert_eq!(pearson(&one, &other).unwrap().1, false, "fewer than 2 rows");
    }

    #[test]
    fn catalog_roundtrips_through_jsonl() {
        let table = crate::data::Table::new(
            "t",
            vec![
                Column::new("a", ColumnData::Int((0..40).map(Some).collect())),
                Column::new("b", ColumnData::Float((0..40).map(|i| Some(i as f64 * 0.5)).collect())),
                Column::new("s", ColumnData::Str((0..40).map(|i| Some(format!("v{i:02}"))).collect())),
            ],
        )
        .unwrap();
        let ds = Dataset::new("demo", vec![table]).unwrap();
        let mut catalog = StatsCatalog::compute(&ds).unwrap();
        catalog.links.push(PkFkLink {
            pk_table: "t".into(),
            pk_column: "a".into(),
            fk_table: "u".into(),
            fk_column: "a_fk".into(),
        });
        let text = catalog.to_jsonl().unwrap();
        let back = StatsCatalog::from_jsonl(&text).unwrap();
        assert_eq!(back, catalog);
        // Serialization is deterministic.
        assert_eq!(catalog.to_jsonl().unwrap(), text);
    }
}
