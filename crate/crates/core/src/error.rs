use thiserror::Error;

/// Errors produced by the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("white noise has no pointwise kernel")]
    NoPointwiseKernel,
    #[error("domain error: {0}")]
    Domain(String),
    #[error("Dalang condition violated")]
    DalangViolated,
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error("quadrature did not converge (error estimate {achieved:e}, requested {requested:e})")]
    Quadrature { achieved: f64, requested: f64 },
    #[error("chaos order {n} exceeds the supported maximum {max}")]
    OrderTooLarge { n: usize, max: usize },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("Monte Carlo error {achieved:e} above requested tolerance {requested:e}")]
    McTolerance { achieved: f64, requested: f64 },
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
