use std::path::PathBuf;

use thiserror::Error;

use crate::talagrand::ConvexDistanceResult;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("convex distance did not converge after {iterations} iterations (gap {gap:e})")]
    ConvergenceFailure {
        iterations: usize,
        gap: f64,
        best: Box<ConvexDistanceResult>,
    },

    #[error("file not found: {}", .0.display())]
    NotFound(PathBuf),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid configuration value(s) for {}: {message}", .keys.join(", "))]
    Validation { keys: Vec<String>, message: String },

    #[error("usage: {0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
