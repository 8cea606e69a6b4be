//! Error type shared by every module in the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or out-of-domain data handed to an operation.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Configuration values that violate their documented domain,
    /// or a budget/rate pair infeasible for the given horizon.
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    /// Matrix or plan dimensions disagree.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Text-format parse failure; `line` is 1-based.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Instance exceeds a solver's state-space guard.
    #[error("instance too large: {0}")]
    TooLarge(String),

    /// Invariant violation inside a solver; indicates a bug, not bad input.
    #[error("internal error: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::InvalidConfig(msg.into())
    }

    pub(crate) fn dims(msg: impl Into<String>) -> Self {
        Error::DimensionMismatch(msg.into())
    }

    pub(crate) fn internal(msg: impl Into<String>) -> Self {
        Error::Internal(msg.into())
    }
}
