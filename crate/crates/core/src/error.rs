use thiserror::Error;

/// Errors raised by the shape, spectral and optimization routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid norm: {0}")]
    InvalidNorm(String),
    #[error("norm expression parse error at `{input}`: {reason}")]
    NormParse { input: String, reason: String },
    #[error("degenerate polygon: {0}")]
    DegeneratePolygon(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("grid too coarse: spacing {spacing} must be below inradius/4 = {limit}")]
    GridTooCoarse { spacing: f64, limit: f64 },
    #[error("discretization has too few interior nodes ({0})")]
    EmptyInterior(usize),
    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("infeasible support vector: {0}")]
    Infeasible(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
