use alloc::string::String;
use alloc::vec::Vec;

use crate::dsl::{EvalError, ParseError};

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error(transparent)]
    Eval(#[from] EvalError),

    /// The fundamental tensor (or another metric-like matrix) is singular.
    #[error("degenerate fundamental tensor at x={x:?}, y={y:?}: |det| = {det:e}")]
    Degenerate { x: Vec<f64>, y: Vec<f64>, det: f64 },

    #[error("singular Jacobian at x={x:?}: |det| = {det:e}")]
    SingularJacobian { x: Vec<f64>, det: f64 },

    #[error("point x={x:?}, y={y:?} is not inside the cone domain (margin {margin:e})")]
    OutsideCone { x: Vec<f64>, y: Vec<f64>, margin: f64 },

    #[error("index is not constant: {first} at the first sample, {found} at x={x:?}, y={y:?}")]
    InconsistentIndex {
        first: usize,
        found: usize,
        x: Vec<f64>,
        y: Vec<f64>,
    },

    #[error("sampling exhausted: {attempts} rejected draws for sample {sample}")]
    SamplingExhausted { sample: usize, attempts: usize },

    /// Averaging needs a compact indicatrix and a positive-definite fundamental tensor.
    #[error("not a Finsler structure at x={x:?}: {reason}")]
    NotFinsler { x: Vec<f64>, reason: String },

    #[error("quadrature did not converge after {doublings} doublings (last change {last_change:e})")]
    NoConvergence { doublings: usize, last_change: f64 },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// Numeric precondition violations (as opposed to bad input text).
    pub fn is_numeric_precondition(&self) -> bool {
        matches!(
            self,
            Error::Eval(_)
                | Error::Degenerate { .. }
                | Error::SingularJacobian { .. }
                | Error::OutsideCone { .. }
                | Error::InconsistentIndex { .. }
                | Error::SamplingExhausted { .. }
                | Error::NotFinsler { .. }
                | Error::NoConvergence { .. }
                | Error::Precondition(_)
        )
    }
}
