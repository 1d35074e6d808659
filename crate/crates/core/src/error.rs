use thiserror::Error;

/// Invalid arguments: outside the domain where a function is defined or
/// where the evaluators can certify their output.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DomainError {
    #[error("q must be positive and finite, got {0}")]
    QNotPositive(String),
    #[error("q = {q} lies within {guard:e} of 1; the series cannot be truncated with a certified bound")]
    QNearOne { q: String, guard: f64 },
    #[error("q = {got} is outside the required range {expected}")]
    QOutOfRange { expected: &'static str, got: String },
    #[error("x must be positive and finite, got {0}")]
    XNotPositive(String),
    #[error("finite-difference step must be nonzero and finite, got {0}")]
    BadStep(f64),
    #[error("index quadruple ({r},{m},{n},{s}) violates r >= m >= n >= s >= 0 with r >= 1")]
    IndexOrder { r: u32, m: u32, n: u32, s: u32 },
    #[error("index quadruple ({r},{m},{n},{s}) is not balanced: r + s != m + n")]
    Unbalanced { r: u32, m: u32, n: u32, s: u32 },
    #[error("invalid precision budget: {0}")]
    Budget(String),
    #[error("{0}")]
    Argument(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("series did not reach the requested tolerance within {max_terms} terms (last tail bound {tail_bound})")]
    NonConvergence { max_terms: usize, tail_bound: String },
    #[error("sequence of length {len} is too short for a difference of order {order}")]
    Length { len: usize, order: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
