use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("resource budget exceeded: {what} needs {requested}, budget is {budget}")]
    Resource {
        what: &'static str,
        requested: u128,
        budget: u128,
    },

    #[error(
        "singular value iteration did not converge within {iterations} iterations ({rows}x{cols} matrix)"
    )]
    NoConvergence {
        iterations: usize,
        rows: usize,
        cols: usize,
    },

    #[error("rank-deficient sample set: {0}")]
    RankDeficient(String),

    #[error("amplitude fit at degree {degree} left residual {residual:e} (queries: {queries})")]
    DegreeBoundViolation {
        degree: usize,
        queries: usize,
        residual: f64,
    },

    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn contract(msg: impl Into<String>) -> Error {
    Error::Contract(msg.into())
}
