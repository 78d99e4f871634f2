use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("bit sequence of length {len} is not a multiple of {bits_per_symbol} bits per symbol")]
    LengthMismatch { len: usize, bits_per_symbol: usize },

    #[error("bit value {0} is not 0 or 1")]
    InvalidBit(u8),

    #[error("moment estimation needs at least one sample")]
    EmptyInput,

    #[error("invalid moment order p={p}, q={q}")]
    InvalidOrder { p: u32, q: u32 },

    #[error("class {class} would receive {train} training and {test} test rows")]
    DegenerateClass {
        class: String,
        train: usize,
        test: usize,
    },

    #[error("schema mismatch in {path}: {reason}")]
    Schema { path: PathBuf, reason: String },

    #[error("k={k} must lie in 1..={n_rows}")]
    KOutOfRange { k: usize, n_rows: usize },

    #[error("training set: {0}")]
    InvalidTrainingSet(String),

    #[error("feature dimension mismatch: model expects {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("missing class: {0}")]
    MissingClass(String),

    #[error("length mismatch: {predicted} predictions for {truth} ground-truth labels")]
    EvaluationLength { predicted: usize, truth: usize },

    #[error("unsupported model file: {0}")]
    ModelFormat(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
