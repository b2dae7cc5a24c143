use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, GrothError>;

#[derive(Debug, Error)]
pub enum GrothError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("instance too large: {0}")]
    TooLarge(String),

    #[error("degenerate instance: {0}")]
    DegenerateInstance(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl GrothError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        GrothError::InvalidInput(msg.into())
    }

    pub(crate) fn format(msg: impl Into<String>) -> Self {
        GrothError::Format(msg.into())
    }
}
