use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("no connected random geometric graph with n={n}, radius={radius} after {attempts} attempts")]
    Disconnected { n: usize, radius: f64, attempts: usize },

    #[error("graph is not connected")]
    GraphNotConnected,

    #[error("mixing matrix invalid: {0}")]
    InvalidMixing(String),

    #[error("relative error undefined for a zero minimizer")]
    ZeroMinimizer,

    #[error("did not converge within {iterations} iterations (gradient norm {grad_norm:e})")]
    NotConverged { iterations: usize, grad_norm: f64 },

    #[error("singular linear system")]
    Singular,

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("config error in `{field}`: {msg}")]
    Config { field: String, msg: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn config(field: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Config { field: field.into(), msg: msg.into() }
    }
}
