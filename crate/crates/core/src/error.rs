use thiserror::Error;

/// Errors raised by the numerical pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("value outside the domain: {0}")]
    Domain(String),
    #[error("degenerate measure: {0}")]
    DegenerateMeasure(String),
    #[error("precision loss: {0}")]
    Precision(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    #[error("ordering violation: {0}")]
    Ordering(String),
    #[error("invalid correlation matrix: {0}")]
    InvalidCorrelation(String),
    #[error("map is singular or ill-conditioned (condition number {cond:e})")]
    SingularMap { cond: f64 },
    #[error("ambiguous fixed point: {0}")]
    Multiplicity(String),
    #[error("unsupported model: {0}")]
    UnsupportedModel(String),
    #[error("eigendecomposition failed: {0}")]
    Eigen(String),
}

pub type Result<T> = std::result::Result<T, Error>;
