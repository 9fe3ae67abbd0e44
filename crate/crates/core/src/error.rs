use thiserror::Error;

/// Errors produced by the numerical, model and estimation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("matrix is not symmetric positive definite")]
    NotSpd,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },
    #[error("moment of order {order} of the mixing variable is undefined for {law}")]
    MomentUndefined { order: u32, law: String },
    #[error("quadrature did not converge: estimate {estimate:e}, error estimate {error:e}")]
    QuadratureNonConvergence { estimate: f64, error: f64 },
    #[error("degenerate projection direction")]
    DegenerateDirection,
    #[error("shape vector is zero; every direction attains zero skewness")]
    NoUniqueDirection,
    #[error("degenerate sample: {0}")]
    DegenerateSample(String),
    #[error("sample covariance is rank deficient")]
    RankDeficient,
}

pub type Result<T> = std::result::Result<T, Error>;
