use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SrdError {
    #[error("value at row {index} is not finite")]
    NonFiniteValue { index: usize },

    #[error("need at least 2 objects, got {len}")]
    TooShort { len: usize },

    #[error("size mismatch: {left} vs {right}")]
    SizeMismatch { left: usize, right: usize },

    #[error("index {index} out of range for {n} objects")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("invalid ranking: {0}")]
    InvalidRanking(String),

    #[error("exact null distribution supported for n in [2, 10], got {n}")]
    OutOfSupportedRange { n: usize },

    #[error("cross-validation needs at least 4 rows, got {n}")]
    TooFewRows { n: usize },

    #[error("invalid fold count {k}")]
    InvalidFolds { k: usize },

    #[error("alpha must lie in (0, 1), got {0}")]
    InvalidAlpha(f64),

    #[error("unknown method '{0}'")]
    UnknownMethod(String),

    #[error("transformation {transformation} needs n >= {min}, got {n}")]
    SizeTooSmall { transformation: String, n: usize, min: usize },

    #[error("unsupported scenario size n = {n}")]
    UnsupportedSize { n: usize },

    #[error("unknown scenario '{0}'")]
    UnknownScenario(String),

    #[error("rejection table is missing {0}")]
    MissingScenario(String),

    #[error("criteria cover different method sets")]
    MethodSetMismatch,

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid data matrix: {0}")]
    InvalidMatrix(String),

    #[error("invalid simulation plan: {0}")]
    InvalidPlan(String),

    #[error("simulation cell {cell} failed: {source}")]
    CellFailed {
        cell: String,
        #[source]
        source: Box<SrdError>,
    },

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("malformed table: {0}")]
    MalformedTable(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = SrdError> = std::result::Result<T, E>;
