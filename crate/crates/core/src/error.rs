use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid interval: lo={lo} > hi={hi}")]
    InvalidInterval { lo: f64, hi: f64 },

    #[error("dimension mismatch for {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid config key `{key}`: {reason}")]
    InvalidConfig { key: String, reason: String },

    #[error("negative budget {0}")]
    NegativeBudget(f64),

    #[error("unknown analytic profile `{0}`")]
    UnknownAnalytic(String),

    #[error("delta from worker {worker} missing at iteration {iteration}")]
    MissingDelta { worker: u64, iteration: u64 },

    #[error("no active workers at iteration {0}")]
    NoWorkers(u64),

    #[error("non-finite parameter after step {step} (player {player})")]
    NonFinite { step: u64, player: usize },

    #[error("worker replicas diverged at iteration {0}")]
    ReplicaDivergence(u64),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidConfig {
            key: key.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
