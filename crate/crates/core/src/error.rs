use thiserror::Error;

/// Errors raised by the surrogate, tuning and optimization layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("value {value} outside the domain [{lower}, {upper}]")]
    Domain { value: f64, lower: f64, upper: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("correlation matrix is not positive definite (last nugget tried: {nugget:e})")]
    IllConditioned { nugget: f64 },

    #[error("trend matrix is rank deficient ({rank} of {columns} columns independent)")]
    SingularTrend { rank: usize, columns: usize },

    #[error("responses have zero variance")]
    DegenerateResponse,

    #[error("degenerate model: {0}")]
    Degenerate(String),

    #[error("objective evaluation failed: {0}")]
    Objective(String),

    #[error("I/O failure: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
