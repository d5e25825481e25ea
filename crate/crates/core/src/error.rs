use alloc::boxed::Box;

use crate::eigen::EigenPair;
use crate::projection::ProjectionMatrix;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(&'static str),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },

    #[error("diagonal entry {index} is negative ({value})")]
    NegativeDiagonal { index: usize, value: f64 },

    #[error("weight {index} must be strictly positive, got {value}")]
    NonPositiveWeight { index: usize, value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),

    #[error(
        "eigensolver did not converge after {matvecs} matvecs (value {}, residual {})",
        best.value,
        best.residual
    )]
    EigenNotConverged { best: Box<EigenPair>, matvecs: usize },

    #[error("brute-force oracle refuses n = {n} (cap is {cap})")]
    OracleTooLarge { n: usize, cap: usize },

    #[error("top-class probability {p_a} is below runner-up probability {p_b}")]
    ProbabilityOrder { p_a: f64, p_b: f64 },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error(
        "no projection within reconstruction budget {budget} (best candidate error {})",
        best.reconstruction_error
    )]
    NoFeasibleProjection { budget: f64, best: Box<ProjectionMatrix> },
}
