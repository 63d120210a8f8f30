use thiserror::Error;

use crate::expr::ParseError;

/// Errors raised by the toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("evaluation fault at `{node}`: {reason}")]
    EvaluationFault { node: String, reason: String },

    #[error("unknown function `{0}`")]
    UnknownFunction(String),

    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("function value at the base point is not finite")]
    BasePointInfinite,

    #[error("pieces do not partition the real line: {0}")]
    PieceCover(String),

    #[error("no weak subgradient found with c <= {c_max}")]
    CBudgetExhausted { c_max: f64 },

    #[error("radial epiderivative is -inf in direction {direction:?}")]
    NotEpidifferentiable { direction: Vec<f64> },

    #[error("direction component {index} is zero; Sgn is undefined there")]
    ZeroComponent { index: usize },

    #[error("reference derivative not available in direction {direction:?}")]
    ReferenceNotAvailable { direction: Vec<f64> },

    #[error("invalid sampling schedule: {0}")]
    InvalidSchedule(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
