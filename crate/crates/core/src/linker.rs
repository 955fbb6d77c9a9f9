//! Pk-fk link discovery.
//!
//! Three steps over a dataset and its catalog:
//!
//! 1. **Key candidates** — columns whose distinct count exceeds a uniqueness
//!    threshold (default 0.9) of their non-NULL row count.
//! 2. **Fact/dimension split** — a table is a fact table when its row count
//!    is at least `ratio` (default 5) times the median row count of the other
//!    tables; everything else is a dimension.
//! 3. **Join counting** — for each dimension key candidate, every
//!    type-compatible fact column is joined for real (no budget) and the
//!    column producing the most join results wins. Ties break by
//!    lexicographic (fk_table, fk_column); candidates with zero join results
//!    are dropped entirely.
//!
//! The output is the ordered list of discovered links, which is stored in the
//! catalog and is the only join surface the workload generator uses.

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::exec::execute;
use crate::stats::{PkFkLink, StatsCatalog};
use crate::workload::{JoinSpec, QuerySpec, ScanSpec};
use crate::Result;

/// Tunables for link discovery.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LinkerConfig {
    /// Minimum distinct/non-NULL ratio for a key candidate.
    pub uniqueness_threshold: f64,
    /// Fact tables have at least this multiple of the median row count of the
    /// remaining tables.
    pub fact_ratio: f64,
}

impl Default for LinkerConfig {
    fn default() -> Self {
        LinkerConfig {
            uniqueness_threshold: 0.9,
            fact_ratio: 5.0,
        }
    }
}

/// A key candidate column, ordered by decreasing uniqueness.
#[derive(Debug, Clone, PartialEq)]
pub struct KeyCandidate {
    pub table: String,
    pub column: String,
    pub num_unique: u64,
    /// distinct / non-NULL rows, in [0, 1].
    pub uniqueness: f64,
}

/// Key candidates of one table: columns whose distinct count exceeds the
/// threshold fraction of non-NULL rows, sorted by distinct count descending
/// (ties by column name) so the head is the best pk candidate.
pub fn key_candidates(
    catalog: &StatsCatalog,
    table: &str,
    config: &LinkerConfig,
) -> Result<Vec<KeyCandidate>> {
    let tc = catalog.table(table)?;
    let mut out = Vec::new();
    for (name, stats) in &tc.columns {
        // Non-NULL row count, reconstructed from the stored fraction.
        let non_null = (tc.rows as f64 * (1.0 - stats.null_frac)).round();
        if non_null < 1.0 {
            continue;
        }
        let uniqueness = stats.num_unique as f64 / non_null;
        if uniqueness > config.uniqueness_threshold {
            out.push(KeyCandidate {
                table: table.to_string(),
                column: name.clone(),
                num_unique: stats.num_unique,
                uniqueness,
            });
        }
    }
    out.sort_by(|a, b| {
        b.num_unique
            .cmp(&a.num_unique)
            .then_with(|| a.column.cmp(&b.column))
    });
    Ok(out)
}

/// Fact/dimension split by relative row count. Returns (facts, dimensions),
/// each sorted by table name. A single-table dataset has no split (both
/// lists empty) because there is nothing to join.
pub fn split_fact_dimension(
    catalog: &StatsCatalog,
    config: &LinkerConfig,
) -> (Vec<String>, Vec<String>) {
    if catalog.tables.len() < 2 {
        return (Vec::new(), Vec::new());
    }
    let mut facts = Vec::new();
    let mut dims = Vec::new();
    for t in &catalog.tables {
        let mut others: Vec<u64> = catalog
            .tables
            .iter()
            .filter(|o| o.table != t.table)
            .map(|o| o.rows)
            .collect();
        others.sort_unstable();
        let median = median_of_sorted(&others);
        if t.rows as f64 >= config.fact_ratio * median {
            facts.push(t.table.clone());
        } else {
            dims.push(t.table.clone());
        }
    }
    facts.sort_unstable();
    dims.sort_unstable();
    (facts, dims)
}

/// Median of a sorted u64 slice (mean of the middle pair for even lengths).
fn median_of_sorted(xs: &[u64]) -> f64 {
    let n = xs.len();
    if n == 0 {
        return 0.0;
    }
    if n % 2 == 1 {
        xs[n / 2] as f64
    } else {
        (xs[n / 2 - 1] as f64 + xs[n / 2] as f64) / 2.0
    }
}

/// Discover pk-fk links: for the best key candidate of each dimension table,
/// count real join results against every type-compatible column of every
/// fact table and keep the argmax (ties to the lexicographically first
/// (fk_table, fk_column); zero-result candidates dropped).
pub fn discover_links(
    dataset: &Dataset,
    catalog: &StatsCatalog,
    config: &LinkerConfig,
) -> Result<Vec<PkFkLink>> {
    let (facts, dims) = split_fact_dimension(catalog, config);
    let mut links = Vec::new();
    for dim in &dims {
        let candidates = key_candidates(catalog, dim, config)?;
        let Some(pk) = candidates.first() else {
            continue;
        };
        let pk_stats = catalog.column(dim, &pk.column)?;
        // Best (count, fk_table, fk_column); lexicographic tie-break falls
        // out of strict-greater comparison over name-sorted iteration.
        let mut best: Option<(u64, String, String)> = None;
        for fact in &facts {
            let ft = catalog.table(fact)?;
            let mut fk_names: Vec<&String> = ft.columns.iter().map(|(n, _)| n).collect();
            fk_names.sort_unstable();
            for fk_col in fk_names {
                let fk_stats = catalog.column(fact, fk_col)?;
                if fk_stats.data_type != pk_stats.data_type {
                    continue;
                }
                let spec = QuerySpec {
                    scans: vec![
                        ScanSpec {
                            table: dim.clone(),
                            predicates: vec![],
                        },
                        ScanSpec {
                            table: fact.clone(),
                            predicates: vec![],
                        },
                    ],
                    join: Some(JoinSpec {
                        left_table: dim.clone(),
                        left_column: pk.column.clone(),
                        right_table: fact.clone(),
                        right_column: fk_col.clone(),
                    }),
                };
                let outcome = execute(dataset, &spec, None)?;
                let count = outcome.cardinality.expect("unbudgeted execution cannot time out");
                if count == 0 {
                    continue;
                }
                let better = match &best {
                    None => true,
                    Some((best_count, _, _)) => count > *best_count,
                };
                if better {
                    best = Some((count, fact.clone(), fk_col.clone()));
                }
            }
        }
        if let Some((_, fk_table, fk_column)) = best {
            links.push(PkFkLink {
                pk_table: dim.clone(),
                pk_column: pk.column.clone(),
                fk_table,
                fk_column,
            });
        }
    }
    links.sort();
    Ok(links)
}
