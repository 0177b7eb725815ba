use std::path::PathBuf;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid range for {field}: min {min} > max {max}")]
    InvalidRange { field: &'static str, min: f64, max: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("dimension mismatch: expected {expected}, got {actual} ({context})")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    #[error("loss must be a scalar, got a {rows}x{cols} output")]
    NonScalarLoss { rows: usize, cols: usize },

    #[error("non-finite loss encountered in {0}; parameters restored")]
    NonFiniteLoss(&'static str),

    #[error("sampling distribution has empty support")]
    EmptySupport,

    #[error("schedule shrinks at entry {0}")]
    ShrinkingSchedule(usize),

    #[error("initial box lies outside the curriculum bounds")]
    BoxOutOfBounds,

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("body hash mismatch: checkpoint records {expected}, weights hash to {actual}")]
    BodyHashMismatch { expected: String, actual: String },

    #[error("grid specs differ between runs: {0}")]
    GridMismatch(String),

    #[error("empty series")]
    EmptySeries,

    #[error("leg length must be positive, got {0}")]
    NonPositiveLegLength(f64),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
