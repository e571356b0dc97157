//! Error type shared by every module of the crate.

use thiserror::Error;

/// Failures reported by model construction, evaluation, integration and sampling.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Graph or network structure is malformed.
    #[error("structural error: {0}")]
    Structural(String),
    /// Length mismatch between a vector and the space it should live in.
    #[error("dimension mismatch: expected {expected}, got {got} ({what})")]
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    /// An argument lies outside the domain of the function.
    #[error("domain violation: {0}")]
    Domain(String),
    /// A finite input produced a non-finite output.
    #[error("range error: {0}")]
    Range(String),
    /// The maximiser of a grid Legendre transform sits on the grid boundary.
    #[error("grid too small: maximiser at the boundary of [{lo}, {hi}]")]
    GridTooSmall { lo: f64, hi: f64 },
    /// The generator does not have a unique strictly positive invariant measure.
    #[error("no unique invariant measure: {0}")]
    NoUniqueMeasure(String),
    /// A model invariant (stationarity, complex balance, normalisation, ...) fails.
    #[error("model invalid ({invariant}): {detail}")]
    ModelInvalid {
        invariant: &'static str,
        detail: String,
    },
    /// A velocity is not in the range of the continuity operator.
    #[error("infeasible velocity: residual {0:e}")]
    InfeasibleVelocity(f64),
    /// An iterative solver did not converge.
    #[error("solver did not converge: {0}")]
    Convergence(String),
    /// The adaptive integrator needed a step below the minimum step size.
    #[error("step size underflow at t = {t}: h = {h:e}")]
    Stiffness { t: f64, h: f64 },
    /// The operation is not available for this model family.
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(what: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dimension {
            what,
            expected,
            got,
        })
    }
}
