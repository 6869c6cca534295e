use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Shapes or indices do not line up (also covers out-of-range indices).
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A parameter violates a documented precondition.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The requested parameter combination cannot produce a valid object
    /// (e.g. more selectors than ambient dimensions).
    #[error("infeasible parameters: {0}")]
    Infeasible(String),

    /// Non-finite values where finite reals are required.
    #[error("numeric input: {0}")]
    NumericInput(String),

    /// Text-format parse failure.
    #[error("parse error: {0}")]
    Parse(String),

    /// Operation is defined only for a different matrix class.
    #[error("not applicable: {0}")]
    NotApplicable(String),
}

pub type Result<T> = std::result::Result<T, Error>;
