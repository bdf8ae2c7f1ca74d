//! Numerical toolkit for σ_k Hessian equations on the round sphere in
//! support-function form,
//!
//! ```text
//!     σ_k(∇²u + (u+ε) g_{Sⁿ}) = u^{p0} f      on Sⁿ,
//! ```
//!
//! where `u` is the support function of a convex hypersurface, `σ_k` is the
//! k-th elementary symmetric function of the eigenvalues of
//! `W_u = ∇²u + u g`, and `0 < p0 < k`. The crate provides:
//!
//! - exact calculus of elementary symmetric functions on symmetric matrices
//!   ([`symfun`]): values, first/second derivatives, complete polarization,
//!   Γ_k cone membership;
//! - structured discretizations of S² and S³ with covariant derivative
//!   operators, quadrature, and antipodal symmetrization ([`spheregrid`]);
//! - the discrete equation: residuals, exact Jacobians, the homotopy family
//!   `f_t`, closed-form degenerate examples, and the spherical-convexity
//!   certificate for the data `f` ([`problem`]);
//! - a damped Newton solver with Γ_k-preserving line search, homotopy
//!   continuation in `t`, and ε-regularization continuation ([`solver`]);
//! - monitors for every integral identity and a priori estimate the theory
//!   provides: Minkowski's formula, Alexandrov–Fenchel ratios, gradient and
//!   Hessian-quotient bounds, mixed p-quermassintegrals, and an ODE
//!   representation along extremal geodesics ([`diagnostics`]);
//! - reconstruction of the convex body from its support function and mesh
//!   export ([`geometry`]).
//!
//! The `cmk` binary exposes all of this behind a small subcommand CLI; the
//! `examples/` directory contains one runnable example per capability.

pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod geometry;
pub mod problem;
pub mod solver;
pub mod spheregrid;
pub mod symfun;

mod linalg;
mod threads;

pub use error::{Error, Result};
pub use problem::ProblemSpec;
pub use solver::{SolveOptions, SolveReport};
pub use spheregrid::{GridKind, ScalarField, SphereGrid, WField};
pub use symfun::SymMatrix;

/// Binomial coefficient C(n, k) as `f64`; exact for the small arguments used
/// throughout (n ≤ 8).
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut num = 1.0;
    let mut den = 1.0;
    for i in 0..k {
        num *= (n - i) as f64;
        den *= (i + 1) as f64;
    }
    num / den
}
