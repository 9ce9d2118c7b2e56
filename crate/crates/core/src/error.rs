use thiserror::Error;

/// Errors produced by partition construction, fitting and the experiment harness.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("x = {x} lies outside [{a}, {b}]")]
    OutOfDomain { x: f64, a: f64, b: f64 },

    #[error("computation failed: {0}")]
    ComputationFailure(String),

    #[error("insufficient context: {0}")]
    InsufficientContext(String),

    #[error("subinterval {k} is a boundary subinterval and cannot be localized")]
    BoundaryUnsupported { k: usize },

    #[error("geometry mismatch: {0}")]
    GeometryMismatch(String),

    #[error("unknown function id `{0}`")]
    UnknownFunction(String),

    #[error("not found: {0}")]
    NotFound(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// True for errors caused by bad input rather than numerical breakdown.
    pub fn is_configuration(&self) -> bool {
        !matches!(self, Error::ComputationFailure(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
