use std::path::PathBuf;

use thiserror::Error;

/// Errors raised while loading inputs or scoring.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: file is not valid UTF-8 (byte offset {offset})")]
    Encoding { path: PathBuf, offset: usize },

    #[error("line count mismatch: {hyp_path} has {hyp_lines} lines but {ref_path} has {ref_lines}")]
    LineCountMismatch {
        hyp_path: PathBuf,
        hyp_lines: usize,
        ref_path: PathBuf,
        ref_lines: usize,
    },

    #[error("{path}:{line}: malformed synonym line (need at least two distinct words)")]
    MalformedLine { path: PathBuf, line: usize },

    #[error("rare-word percent must lie in (0, 1], got {0}")]
    InvalidPercent(f64),

    #[error("n-gram order mismatch: expected {expected}, found {found}")]
    OrderMismatch { expected: usize, found: usize },

    #[error("corpus is empty")]
    EmptyCorpus,

    #[error("invalid corpus: {0}")]
    InvalidCorpus(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("vectors differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),

    #[error("need at least 2 observations, got {0}")]
    TooFewObservations(usize),

    #[error("zero variance: correlation undefined")]
    ZeroVariance,

    #[error("degenerate contingency table: lambda undefined (n equals the largest column total)")]
    DegenerateTable,

    #[error("invalid contingency table: {0}")]
    InvalidTable(String),

    #[error("only {distinct} distinct values, cannot fill {bins} bins")]
    InsufficientDistinctValues { distinct: usize, bins: usize },

    #[error("{origin}: {message}")]
    Parse { origin: String, message: String },

    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
