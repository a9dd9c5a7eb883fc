use thiserror::Error;

use crate::expr::EvalError;

/// Whether a failure comes from bad input or from a numerical procedure
/// that could not produce a trustworthy answer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Input,
    Numeric,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("empty box: {0}")]
    EmptyBox(String),

    #[error("evaluation failed at {point:?}: {source}")]
    Domain { point: Vec<f64>, source: EvalError },

    #[error(transparent)]
    Eval(#[from] EvalError),

    #[error("stereographic projection is undefined at the north pole")]
    NorthPole,

    #[error("empty set: {0}")]
    EmptySet(String),

    #[error("point {point:?} is outside the sampled domain")]
    OutsideDomain { point: Vec<f64> },

    #[error("point {point:?} is isolated in the sampled domain")]
    IsolatedPoint { point: Vec<f64> },

    #[error("no seam-free gradient samples at radius {radius}")]
    DegenerateSeams { radius: f64 },

    #[error("minimum-norm iteration did not converge after {iterations} iterations (gap {gap:e})")]
    NotConverged { iterations: usize, gap: f64 },

    #[error("fit rejected: {0}")]
    FitRejected(String),

    #[error("set is a cone at the base point; conic exponent undefined")]
    ConeDetected,

    #[error("assumption failed: minimum-norm subgradient at the origin is {h0:e}")]
    NotCriticalAtOrigin { h0: f64 },
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::DimensionMismatch { .. }
            | Error::InvalidArgument(_)
            | Error::EmptyBox(_)
            | Error::Domain { .. }
            | Error::Eval(_)
            | Error::NorthPole
            | Error::OutsideDomain { .. } => ErrorClass::Input,
            Error::EmptySet(_)
            | Error::IsolatedPoint { .. }
            | Error::DegenerateSeams { .. }
            | Error::NotConverged { .. }
            | Error::FitRejected(_)
            | Error::ConeDetected
            | Error::NotCriticalAtOrigin { .. } => ErrorClass::Numeric,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
