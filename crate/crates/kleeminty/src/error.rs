use std::path::PathBuf;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A configuration value is outside its admissible range.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// A convention (run count, rotation angle, ...) was violated without an
    /// explicit override.
    #[error("convention violated: {0} (pass an override to proceed anyway)")]
    ConventionViolated(String),

    /// A vector's length does not match the problem dimension.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// An evaluation was requested after the budget was spent. This always
    /// indicates a solver bug; the run driver never lets it happen.
    #[error("evaluation budget of {budget} exhausted")]
    BudgetExhausted { budget: u64 },

    /// A candidate or evaluation produced a non-finite number.
    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    /// The vertex sweep is capped to keep 2^N enumerable.
    #[error("vertex enumeration supports N <= {max}, got {got}")]
    TooManyVertices { max: usize, got: usize },

    /// Records handed to an aggregation step disagree on algorithm/dimension.
    #[error("inconsistent record batch: {0}")]
    InconsistentBatch(String),

    /// An aggregation step needs at least one record.
    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed JSON in {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn json(path: impl Into<PathBuf>, source: serde_json::Error) -> Self {
        Error::Json {
            path: path.into(),
            source,
        }
    }
}
