//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, FhsError>;

#[derive(Debug, Error)]
pub enum FhsError {
    #[error("invalid fractional order alpha = {alpha}: {reason}")]
    InvalidOrder { alpha: f64, reason: &'static str },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch between operator and grid function")]
    GridMismatch,

    #[error("grid function contains a non-finite value")]
    NonFinite,

    #[error(
        "function does not decay at the grid boundary: |u| = {magnitude:.3e} at the edge \
         (relative tolerance {tolerance:.1e}); periodified spectra are unreliable"
    )]
    NonDecaying { magnitude: f64, tolerance: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("the fibering map needs a nonzero direction")]
    ZeroDirection,

    #[error(
        "fibering bracket not found after {expansions} expansions (h'({sigma:.3e}) = {value:.3e}); \
         the potential may violate superquadratic growth"
    )]
    BracketFailure {
        expansions: usize,
        sigma: f64,
        value: f64,
    },

    #[error(
        "line search step underflow at iteration {iteration} (Phi = {phi:.8e}, |grad| = {grad_norm:.3e})"
    )]
    LineSearchFailure {
        iteration: usize,
        phi: f64,
        grad_norm: f64,
    },

    #[error("no multistart run converged: {0}")]
    NoConvergence(String),

    #[error("hypothesis validation failed: {0}")]
    ValidationFailed(String),

    #[error("linear solve failed: {0}")]
    SolveFailure(String),

    #[error("support leak: {0}")]
    SupportLeak(String),
}
