use alloc::string::String;

/// Errors shared by every module.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("ambient dimensions differ: {left} vs {right}")]
    AmbientMismatch { left: usize, right: usize },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("no convergence after {iterations} iterations (contraction estimate {theta:.6})")]
    NotConverged { iterations: usize, theta: f64 },
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("operation is defined over the real field only")]
    RealFieldOnly,
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn precondition(msg: impl Into<String>) -> Error {
    Error::Precondition(msg.into())
}

pub(crate) fn shape(msg: impl Into<String>) -> Error {
    Error::Shape(msg.into())
}
