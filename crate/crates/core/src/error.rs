use thiserror::Error;

/// Errors produced by the numerical toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied argument is outside its documented range.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Vector or matrix dimension does not match the expected one.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A computed or supplied value is NaN or infinite.
    #[error("non-finite value in {0}")]
    NonFinite(String),

    /// A user-supplied distance callback violates the metric axioms.
    #[error("metric violation: {0}")]
    MetricViolation(String),

    /// The operation is documented as out of the supported range.
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
