use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InitError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invalid base hypotheses: {0}")]
    InvalidHypotheses(String),
    #[error("invalid initializer configuration: {0}")]
    InvalidConfig(String),
    #[error("first range measurement must be non-negative, got {0}")]
    NegativeRange(f64),
    #[error("initialization already terminated; hand the estimate over to the tracking filter")]
    Terminated,
    #[error("Cholesky factorization failed after jitter (trace {trace:e})")]
    Cholesky { trace: f64 },
}
