//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Error, Debug)]
pub enum Error {
    /// σ_k order outside `0 ≤ k ≤ n` (or `1 ≤ k` where derivatives are asked).
    #[error("symmetric-function order k={k} out of range for dimension n={n}")]
    InvalidOrder { k: usize, n: usize },

    /// Matrices of different dimensions passed to a polarized form.
    #[error("matrix dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// Grid kind not available for the requested sphere dimension.
    #[error("unsupported grid: kind {kind} with sphere dimension n={n}")]
    UnsupportedGrid { kind: String, n: usize },

    /// Resolution too small or odd (antipodal map must be exact).
    #[error("invalid resolution {res}: need an even node count ≥ 8 per axis")]
    InvalidResolution { res: usize },

    /// A field that must be strictly positive is not.
    #[error("nonpositive support function: min value {min} at node {node}")]
    NonpositiveSupport { min: f64, node: usize },

    /// W_u^ε fails Γ_k membership at some node.
    #[error("W not in Garding cone Γ_{k} at node {node}")]
    NotInConeGammaK { k: usize, node: usize },

    /// Homotopy parameter outside [0, 1].
    #[error("homotopy parameter t={t} outside [0, 1]")]
    InvalidHomotopyParameter { t: f64 },

    /// Closed-form data would lose positivity (p0 ≥ k/2 in the degenerate family).
    #[error("positivity lost: p0={p0} must satisfy 0 < p0 < k/2 = {half_k}")]
    PositivityLost { p0: f64, half_k: f64 },

    /// Newton start violates positivity or admissibility.
    #[error("admissible start required: {reason}")]
    AdmissibleStartRequired { reason: String },

    /// Line search shrank below the floor without an acceptable step.
    #[error("line search step collapse at residual {residual:.3e}")]
    StepCollapse { residual: f64 },

    /// Newton iteration cap reached.
    #[error("no convergence after {iters} Newton iterations (residual {residual:.3e})")]
    NoConvergence { iters: usize, residual: f64 },

    /// Homotopy step underflow; carries the last good state.
    #[error("continuation stuck at t={} (step underflow)", .0.t_reached)]
    ContinuationStuck(Box<crate::solver::ContinuationState>),

    /// Monitor not defined for these parameters (e.g. k = 1 lemmas).
    #[error("not applicable: {0}")]
    NotApplicable(String),

    /// Parameter outside the range a monitor is stated for.
    #[error("out of range: {0}")]
    OutOfRange(String),

    /// Minkowski identity needs k ≤ n−1.
    #[error("Minkowski identity not applicable: k={k} must be ≤ n−1={nm1}")]
    MinkowskiNotApplicable { k: usize, nm1: usize },

    /// Configuration / input-file problems (CLI layer).
    #[error("config error: {0}")]
    Config(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}
