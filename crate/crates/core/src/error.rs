use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Matrix or vector shapes do not fit the operation.
    #[error("dimension error: {0}")]
    Dimension(String),
    /// Input violates a mathematical precondition (not Hermitian, not positive definite, non-finite).
    #[error("domain error: {0}")]
    Domain(String),
    /// Caller supplied an invalid argument value.
    #[error("invalid argument: {0}")]
    Argument(String),
    /// Value too large to evaluate exactly.
    #[error("range error: {0}")]
    Range(String),
    /// A closed form was requested outside the parameter range it is stated for.
    #[error("outside formula validity: {0}")]
    OutOfValidity(String),
}

pub type Result<T> = std::result::Result<T, Error>;
