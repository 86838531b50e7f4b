use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the imputation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("row {row}: value {value} of variable `{variable}` is outside its declared range")]
    Range {
        row: usize,
        variable: String,
        value: i64,
    },

    #[error("arity mismatch: expected {expected} values, got {got}")]
    Arity { expected: usize, got: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("training diverged at cycle {cycle}: loss is not finite")]
    Divergence { cycle: usize },

    #[error("objective returned a non-finite value at {individual:?}")]
    NonFiniteObjective { individual: Vec<f64> },

    #[error("dataset is incomplete: {0}")]
    Incomplete(String),

    #[error("row {0} has every element missing")]
    AllMissing(usize),

    #[error("{path}: line {line}: {message}")]
    Malformed {
        path: String,
        line: u64,
        message: String,
    },

    #[error("reproducibility failure: {0}")]
    Reproducibility(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by configuration rather than by data.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter(_) | Error::UnknownVariable(_) | Error::Json(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
