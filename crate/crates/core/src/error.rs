use thiserror::Error;

/// Errors raised by the operator algebra, the channel model and the bound
/// evaluators.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Input fails a structural or numerical validity check.
    #[error("validation error: {0}")]
    Validation(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A construction would exceed a configured size cap.
    #[error("resource limit exceeded: {0}")]
    Resource(String),

    /// The operation is not defined for the given inputs.
    #[error("domain error: {0}")]
    Domain(String),

    /// Inputs are valid but degenerate for the requested construction.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn validation<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Validation(msg.into()))
}
