use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// Malformed or inconsistent user input.
    #[error("input error: {0}")]
    Input(String),
    /// A precondition of an operation does not hold for the given arguments.
    #[error("domain error: {0}")]
    Domain(String),
    /// An enumeration hit its configured cap.
    #[error("size limit: {what} exceeded cap {cap} (reached {reached})")]
    Size { what: String, cap: usize, reached: usize },
    /// A structural check failed; carries a description of the first failure.
    #[error("verification failed: {0}")]
    Verification(String),
    /// An invariant that the theory guarantees was violated.
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
