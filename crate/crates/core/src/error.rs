use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid hyperparameter `{name}`: {value} (must be positive and finite)")]
    InvalidHyperparameter { name: &'static str, value: f64 },

    #[error("covariance matrix is not positive definite even with jitter {jitter:e}")]
    NotPositiveDefinite { jitter: f64 },

    #[error("at least {required} observations required, got {got}")]
    InsufficientData { required: usize, got: usize },

    #[error("negative variance {0}")]
    NegativeVariance(f64),

    #[error("shot count must be at least 1")]
    ZeroShots,

    #[error("invalid objective: {0}")]
    InvalidObjective(String),

    #[error("objective too large: {0}")]
    ObjectiveTooLarge(String),

    #[error("invalid budget: {0}")]
    InvalidBudget(String),

    #[error("empty record: no incumbent-eligible query")]
    EmptyRecord,

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("{0}")]
    Comparison(String),

    #[error("malformed file {path}: {message}")]
    Malformed { path: PathBuf, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

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
