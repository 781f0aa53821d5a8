use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("operator is not Hermitian: worst entry ({row}, {col}) deviates by {deviation:.3e}")]
    NotHermitian { row: usize, col: usize, deviation: f64 },

    #[error("operator has negative eigenvalue {value:.3e}")]
    NegativeEigenvalue { value: f64 },

    #[error("invalid trace {trace}")]
    InvalidTrace { trace: f64 },

    #[error("Kraus family is not trace preserving (deviation {deviation:.3e})")]
    NotTracePreserving { deviation: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("support of the first argument is not contained in the support of the second")]
    SupportViolation,

    #[error("size guard exceeded: {0}")]
    SizeGuard(String),

    #[error("solver did not converge after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("internal consistency check failed: {0}")]
    Certificate(String),

    #[error("malformed operator file: {0}")]
    Parse(#[from] serde_json::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn mismatch(what: impl Into<String>) -> Self {
        Error::DimensionMismatch(what.into())
    }

    pub(crate) fn invalid(what: impl Into<String>) -> Self {
        Error::InvalidArgument(what.into())
    }
}
