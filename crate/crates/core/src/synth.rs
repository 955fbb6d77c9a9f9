//! Seeded synthetic snowflake datasets with planted pk-fk links.
//!
//! Layout: one fact table plus `table_count - 1` dimension tables (a
//! single-table spec yields just the fact). Every dimension gets a
//! sequential `id` primary key in a per-dimension disjoint value range
//! (offset `i * 1_000_000`), and the fact table gets one `dimXX_fk` column
//! per dimension whose values are sampled from that dimension's actual keys
//! — referential integrity holds by construction, and because non-key
//! columns draw from small offset-free domains, the planted fk is the only
//! fact column that can produce join results against a dimension key.
//!
//! Non-key columns cycle INT / FLOAT / STRING with a distinct-value budget
//! capped at 70% of the row count, so the `id` column is always the strict
//! uniqueness argmax of its table. Value skew follows the configured
//! distribution (uniform, zipf, or a gaussian mixture), which also shapes
//! fk multiplicity — a zipf fact table joins a few dimension keys very
//! often.
//!
//! When `correlation_strength > 0` the fact table carries a FLOAT pair
//! `(c01, c02)` whose *empirical* Pearson correlation equals the requested
//! strength: strengths >= 0.999 duplicate a quantized column through an
//! affine map (r = 1 exactly, moderate distinct count), weaker strengths mix
//! a standardized column with a Gram-Schmidt-orthogonalized noise vector so
//! the sample correlation lands on the target to ~1e-15. The pair contains
//! no NULLs; correlations are computed over pairwise-complete rows, so
//! NULLs would perturb the planted value.

use rand::prelude::*;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal, Zipf};
use serde::{Deserialize, Serialize};

use crate::data::{Column, ColumnData, Dataset, Table};
use crate::stats::PkFkLink;
use crate::{Error, Result};

/// Value distribution for non-key columns and fk multiplicity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ValueDistribution {
    Uniform,
    Zipf,
    GaussianMixture,
}

/// Specification for one synthetic dataset.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SynthSpec {
    pub name: String,
    /// Total tables; 1 means a single (fact-only) table, otherwise one fact
    /// plus `table_count - 1` dimensions.
    pub table_count: usize,
    /// Inclusive row-count range for dimension tables (and the single table
    /// of a one-table dataset).
    pub rows_per_table: (usize, usize),
    /// Inclusive range for the number of non-key columns per table.
    pub columns_per_table: (usize, usize),
    /// Expected NULL fraction of non-key columns, in [0, 1).
    pub null_fraction: f64,
    /// Empirical Pearson correlation of the planted pair; 0 disables it.
    pub correlation_strength: f64,
    pub distribution: ValueDistribution,
    /// Fact rows = ceil(multiplier * max dimension rows); must be >= 1.
    pub fact_row_multiplier: f64,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            name: "synth".to_string(),
            table_count: 3,
            rows_per_table: (100, 400),
            columns_per_table: (3, 5),
            null_fraction: 0.05,
            correlation_strength: 0.0,
            distribution: ValueDistribution::Uniform,
            fact_row_multiplier: 5.0,
            seed: 0,
        }
    }
}

/// Disjoint key-range stride: dimension `i` (1-based) owns ids starting at
/// `i * KEY_STRIDE`. Non-key domains stay far below the first stride.
const KEY_STRIDE: i64 = 1_000_000;

/// Strengths at or above this plant an exact duplicate-shaped pair (r = 1).
const EXACT_COPY_THRESHOLD: f64 = 0.999;

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidSynthSpec(msg));
        if self.name.is_empty() {
            return fail("dataset name must be non-empty".into());
        }
        if self.table_count < 1 || self.table_count > 99 {
            return fail(format!("table_count {} outside 1..=99", self.table_count));
        }
        let (rmin, rmax) = self.rows_per_table;
        if rmin < 3 || rmin > rmax {
            return fail(format!("rows_per_table ({rmin}, {rmax}) must satisfy 3 <= min <= max"));
        }
        if rmax as i64 >= KEY_STRIDE {
            return fail(format!("rows_per_table max {rmax} exceeds the key stride"));
        }
        let (cmin, cmax) = self.columns_per_table;
        if cmin > cmax {
            return fail(format!("columns_per_table ({cmin}, {cmax}) inverted"));
        }
        if !(0.0..1.0).contains(&self.null_fraction) {
            return fail(format!("null_fraction {} outside [0, 1)", self.null_fraction));
        }
        if !(0.0..=1.0).contains(&self.correlation_strength) {
            return fail(format!(
                "correlation_strength {} outside [0, 1]",
                self.correlation_strength
            ));
        }
        if self.fact_row_multiplier < 1.0 || !self.fact_row_multiplier.is_finite() {
            return fail(format!(
                "fact_row_multiplier {} must be finite and >= 1",
                self.fact_row_multiplier
            ));
        }
        Ok(())
    }
}

/// Per-column index sampler over `0..domain`, with any shape parameters
/// drawn once at column-creation time.
enum IndexSampler {
    Uniform { domain: usize },
    Zipf { domain: usize, dist: Zipf<f64> },
    Mixture { domain: usize, components: Vec<(f64, f64)> },
}

impl IndexSampler {
    fn new(dist: ValueDistribution, domain: usize, rng: &mut ChaCha12Rng) -> Self {
        debug_assert!(domain >= 1);
        match dist {
            ValueDistribution::Uniform => IndexSampler::Uniform { domain },
            ValueDistribution::Zipf => IndexSampler::Zipf {
                domain,
                dist: Zipf::new(domain as f64, 1.3).expect("domain >= 1 and s > 0"),
            },
            ValueDistribution::GaussianMixture => {
                let count = rng.random_range(2..=3);
                let components = (0..count)
                    .map(|_| {
                        let mean = rng.random_range(0.15..0.85) * domain as f64;
                        let sd = (domain as f64 / 10.0).max(0.5);
                        (mean, sd)
                    })
                    .collect();
                IndexSampler::Mixture { domain, components }
            }
        }
    }

    fn sample(&self, rng: &mut ChaCha12Rng) -> usize {
        match self {
            IndexSampler::Uniform { domain } => rng.random_range(0..*domain),
            IndexSampler::Zipf { domain, dist } => {
                let rank = dist.sample(rng) as usize;
                rank.saturating_sub(1).min(domain - 1)
            }
            IndexSampler::Mixture { domain, components } => {
                let (mean, sd) = components[rng.random_range(0..components.len())];
                let x = Normal::new(mean, sd).expect("sd > 0").sample(rng);
                (x.round().max(0.0) as usize).min(domain - 1)
            }
        }
    }
}

/// Distinct-value budget for a non-key column: capped at 70% of the rows so
/// key columns always win the uniqueness comparison, floored at 2.
fn domain_budget(rows: usize, rng: &mut ChaCha12Rng) -> usize {
    let cap = ((rows as f64 * 0.7) as usize).clamp(2, 300);
    let lo = (cap / 4).max(2).min(cap);
    rng.random_range(lo..=cap)
}

/// The three non-key column shapes, cycled by position.
#[derive(Clone, Copy)]
enum ExtraKind {
    Int,
    Float,
    Str,
}

/// Generate one non-key column of `rows` values.
fn extra_column(
    name: &str,
    kind: ExtraKind,
    rows: usize,
    spec: &SynthSpec,
    rng: &mut ChaCha12Rng,
) -> Column {
    let domain = domain_budget(rows, rng);
    let sampler = IndexSampler::new(spec.distribution, domain, rng);
    let with_nulls = |rng: &mut ChaCha12Rng| -> bool {
        spec.null_fraction > 0.0 && rng.random::<f64>() < spec.null_fraction
    };
    match kind {
        ExtraKind::Int => {
            let values = (0..rows)
                .map(|_| {
                    let idx = sampler.sample(rng);
                    if with_nulls(rng) {
                        None
                    } else {
                        Some(idx as i64)
                    }
                })
                .collect();
            Column::new(name, ColumnData::Int(values))
        }
        ExtraKind::Float => {
            let base = (rng.random_range(-100..=100) as f64) / 2.0;
            let step = [0.5, 1.5, 2.5][rng.random_range(0..3)];
            let values = (0..rows)
                .map(|_| {
                    let idx = sampler.sample(rng);
                    if with_nulls(rng) {
                        None
                    } else {
                        Some(base + idx as f64 * step)
                    }
                })
                .collect();
            Column::new(name, ColumnData::Float(values))
        }
        ExtraKind::Str => {
            let values = (0..rows)
                .map(|_| {
                    let idx = sampler.sample(rng);
                    if with_nulls(rng) {
                        None
                    } else {
                        Some(format!("v{idx:03}"))
                    }
                })
                .collect();
            Column::new(name, ColumnData::Str(values))
        }
    }
}

/// Population mean and standard deviation.
fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Build the correlated FLOAT pair (no NULLs). Returns (x, y) with empirical
/// Pearson correlation equal to `strength` up to floating-point roundoff.
fn correlated_pair(
    rows: usize,
    strength: f64,
    spec: &SynthSpec,
    rng: &mut ChaCha12Rng,
) -> (Vec<f64>, Vec<f64>) {
    if strength >= EXACT_COPY_THRESHOLD {
        // Quantized base column, then an exact affine copy: r = 1 and both
        // sides keep a moderate distinct count.
        let domain = domain_budget(rows, rng);
        let sampler = IndexSampler::new(spec.distribution, domain, rng);
        let step = [0.5, 1.5, 2.5][rng.random_range(0..3)];
        let mut x: Vec<f64> = (0..rows).map(|_| sampler.sample(rng) as f64 * step).collect();
        if x.iter().all(|&v| v == x[0]) {
            // Degenerate draw: force two distinct values.
            x[0] += step;
        }
        let (mean, sd) = mean_sd(&x);
        let y = x.iter().map(|&v| (v - mean) / sd).collect();
        return (x, y);
    }

    // Continuous base column per the configured distribution.
    let mut x: Vec<f64> = match spec.distribution {
        ValueDistribution::Uniform => (0..rows).map(|_| rng.random::<f64>() * 100.0).collect(),
        ValueDistribution::Zipf => {
            let dist = Zipf::new(1000.0, 1.3).expect("valid zipf");
            (0..rows)
                .map(|_| dist.sample(rng) + rng.random::<f64>())
                .collect()
        }
        ValueDistribution::GaussianMixture => {
            let sampler = IndexSampler::new(ValueDistribution::GaussianMixture, 100, rng);
            (0..rows)
                .map(|_| sampler.sample(rng) as f64 + rng.random::<f64>())
                .collect()
        }
    };
    let (mut mean, mut sd) = mean_sd(&x);
    if sd < 1e-9 {
        x = (0..rows).map(|i| i as f64).collect();
        (mean, sd) = mean_sd(&x);
    }
    let xhat: Vec<f64> = x.iter().map(|&v| (v - mean) / sd).collect();

    // Noise vector, centered and orthogonalized against xhat, then scaled to
    // unit population variance.
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let ehat = loop {
        let eps: Vec<f64> = (0..rows).map(|_| normal.sample(rng)).collect();
        let e_mean = eps.iter().sum::<f64>() / rows as f64;
        let centered: Vec<f64> = eps.iter().map(|&e| e - e_mean).collect();
        let dot: f64 = centered.iter().zip(&xhat).map(|(e, x)| e * x).sum();
        let coeff = dot / rows as f64; // sum(xhat^2) == rows
        let resid: Vec<f64> = centered
            .iter()
            .zip(&xhat)
            .map(|(e, x)| e - coeff * x)
            .collect();
        let (_, resid_sd) = mean_sd(&resid);
        if resid_sd > 1e-9 {
            break resid.iter().map(|&r| r / resid_sd).collect::<Vec<f64>>();
        }
        // Residual collapsed (astronomically unlikely for rows >= 3): redraw.
    };

    let ortho = (1.0 - strength * strength).sqrt();
    let y: Vec<f64> = xhat
        .iter()
        .zip(&ehat)
        .map(|(x, e)| strength * x + ortho * e)
        .collect();
    (x, y)
}

/// Generate a dataset and its planted links.
pub fn generate(spec: &SynthSpec) -> Result<(Dataset, Vec<PkFkLink>)> {
    spec.validate()?;
    let mut rng = ChaCha12Rng::seed_from_u64(spec.seed);
    let (rmin, rmax) = spec.rows_per_table;
    let (cmin, cmax) = spec.columns_per_table;
    let dim_count = spec.table_count - 1;

    // Row counts first, so layout choices don't shift value draws between
    // specs that differ only in later fields.
    let dim_rows: Vec<usize> = (0..dim_count)
        .map(|_| rng.random_range(rmin..=rmax))
        .collect();
    let fact_rows = if dim_count == 0 {
        rng.random_range(rmin..=rmax)
    } else {
        let max_dim = *dim_rows.iter().max().expect("at least one dimension");
        (spec.fact_row_multiplier * max_dim as f64).ceil() as usize
    };

    let mut tables = Vec::with_capacity(spec.table_count);
    let mut links = Vec::with_capacity(dim_count);

    // Dimension tables, in name order.
    for (i, &rows) in dim_rows.iter().enumerate() {
        let dim_no = i + 1;
        let name = format!("dim{dim_no:02}");
        let offset = dim_no as i64 * KEY_STRIDE;
        let mut columns = vec![Column::new(
            "id",
            ColumnData::Int((0..rows).map(|r| Some(offset + r as i64)).collect()),
        )];
        let extra_count = rng.random_range(cmin..=cmax);
        for j in 0..extra_count {
            let kind = [ExtraKind::Int, ExtraKind::Float, ExtraKind::Str][j % 3];
            columns.push(extra_column(
                &format!("c{:02}", j + 1),
                kind,
                rows,
                spec,
                &mut rng,
            ));
        }
        tables.push(Table::new(name.clone(), columns)?);
        links.push(PkFkLink {
            pk_table: name,
            pk_column: "id".to_string(),
            fk_table: "fact".to_string(),
            fk_column: format!("dim{dim_no:02}_fk"),
        });
    }

    // Fact table: fk columns, then non-key columns (first two replaced by
    // the correlated pair when requested).
    let mut columns = Vec::new();
    for (i, &rows) in dim_rows.iter().enumerate() {
        let offset = (i as i64 + 1) * KEY_STRIDE;
        let sampler = IndexSampler::new(spec.distribution, rows, &mut rng);
        let values = (0..fact_rows)
            .map(|_| Some(offset + sampler.sample(&mut rng) as i64))
            .collect();
        columns.push(Column::new(
            format!("dim{:02}_fk", i + 1),
            ColumnData::Int(values),
        ));
    }
    let mut extra_count = rng.random_range(cmin..=cmax);
    let with_pair = spec.correlation_strength > 0.0;
    if with_pair {
        extra_count = extra_count.max(2);
        let (x, y) = correlated_pair(fact_rows, spec.correlation_strength, spec, &mut rng);
        columns.push(Column::new("c01", ColumnData::Float(x.into_iter().map(Some).collect())));
        columns.push(Column::new("c02", ColumnData::Float(y.into_iter().map(Some).collect())));
    }
    let start = if with_pair { 2 } else { 0 };
    for j in start..extra_count {
        let kind = [ExtraKind::Int, ExtraKind::Float, ExtraKind::Str][j % 3];
        columns.push(extra_column(
            &format!("c{:02}", j + 1),
            kind,
            fact_rows,
            spec,
            &mut rng,
        ));
    }
    tables.push(Table::new("fact", columns)?);

    if dim_count == 0 {
        links.clear();
    }
    let dataset = Dataset::new(spec.name.clone(), tables)?;
    Ok((dataset, links))
}

/// Serialize planted links as a JSON array (pretty, trailing newline).
pub fn links_to_json(links: &[PkFkLink]) -> Result<String> {
    Ok(serde_json::to_string_pretty(links)? + "\n")
}

pub fn links_from_json(text: &str) -> Result<Vec<PkFkLink>> {
    Ok(serde_json::from_str(text)?)
}
