use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid resolution: n = {0}, expected n >= {1}")]
    InvalidResolution(usize, usize),
    #[error("invalid derivative order: {0}")]
    InvalidOrder(usize),
    #[error("point x = {0} lies outside [-1, 1]")]
    OutOfDomain(f64),
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("grid mismatch: operand on N = {left}, other on N = {right}")]
    GridMismatch { left: usize, right: usize },
    #[error("invalid generator index {0}, expected 1, 2 or 3")]
    InvalidGenerator(usize),
    #[error("degenerate algebra element: all coefficients below tolerance {0:e}")]
    DegenerateElement(f64),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("dimension mismatch: residual maps {input} unknowns to {output} equations")]
    DimensionMismatch { input: usize, output: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
