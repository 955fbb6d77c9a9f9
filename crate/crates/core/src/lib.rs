//! Core data plane for the cardinality-estimation workbench.
//!
//! This crate owns everything that exists before a neural network enters the
//! picture: typed columnar datasets (loaded from delimited text or
//! synthesized), per-column statistics and pairwise correlations, pk-fk link
//! discovery, workload generation, an exact COUNT(*) executor used to label
//! queries, annotated query graphs, and the classical selectivity baseline.
//!
//! Determinism is a hard requirement throughout: every random choice flows
//! from an explicit seed through a counter-based RNG, and every artifact
//! serializer iterates ordered containers, so repeated runs produce
//! byte-identical output.

pub mod baseline;
pub mod csvio;
pub mod data;
pub mod exec;
pub mod graph;
pub mod linker;
pub mod stats;
pub mod synth;
pub mod workload;

use std::path::PathBuf;

/// Unified error type for the core data plane.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: row {row}: malformed record: {message}")]
    Csv {
        path: String,
        row: usize,
        message: String,
    },
    #[error("table `{table}` column `{column}` row {row}: cannot parse `{value}` as {expected}")]
    ValueParse {
        table: String,
        column: String,
        row: usize,
        value: String,
        expected: &'static str,
    },
    #[error("table `{table}` row {row}: expected {expected} fields, found {found}")]
    RowShape {
        table: String,
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("duplicate table name `{0}`")]
    DuplicateTable(String),
    #[error("duplicate column name `{column}` in table `{table}`")]
    DuplicateColumn { table: String, column: String },
    #[error("table `{table}`: column `{column}` has {actual} rows, table has {expected}")]
    ColumnLength {
        table: String,
        column: String,
        expected: usize,
        actual: usize,
    },
    #[error("table `{0}` has no columns")]
    NoColumns(String),
    #[error("no tables found in {0}")]
    NoTables(PathBuf),
    #[error("unknown table `{0}`")]
    UnknownTable(String),
    #[error("unknown column `{table}`.`{column}`")]
    UnknownColumn { table: String, column: String },
    #[error("schema descriptor: {0}")]
    SchemaDescriptor(String),
    #[error("column `{0}` is empty")]
    EmptyColumn(String),
    #[error("missing statistics for `{table}`.`{column}`")]
    MissingStats { table: String, column: String },
    #[error("invalid synthetic-dataset spec: {0}")]
    InvalidSynthSpec(String),
    #[error("invalid query spec: {0}")]
    InvalidQuerySpec(String),
    #[error("dataset has no discovered pk-fk links to join on")]
    NoJoinableLinks,
    #[error("table `{table}`: could not draw an eligible predicate set after {attempts} attempts")]
    NoEligiblePredicates { table: String, attempts: usize },
    #[error("type mismatch: {0}")]
    TypeMismatch(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Wrap an io error with the path that produced it.
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

/// Derive a child seed from a master seed and a textual stream name.
///
/// Every per-dataset RNG stream is keyed this way so that adding or reordering
/// datasets never shifts the draws of the others.
pub fn derive_seed(master: u64, name: &str) -> u64 {
    use sha2::{Digest, Sha256};
    let mut hasher = Sha256::new();
    hasher.update(master.to_le_bytes());
    hasher.update(name.as_bytes());
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest is 32 bytes"))
}
