//! The discrete equation σ_k(∇²u + (u+ε)g) = u^{p0}·f_t on a sphere grid:
//! residual, exact Jacobian, the homotopy family f_t, closed-form example
//! pairs, and the spherical-convexity certificate for the data f.

use crate::binomial;
use crate::error::{Error, Result};
use crate::linalg::BandedMatrix;
use crate::spheregrid::{covariant_w, GridKind, ScalarField, SphereGrid, WField};
use crate::symfun;
use crate::threads::par_map_into;
use serde::{Deserialize, Serialize};
use std::path::PathBuf;
use std::sync::Arc;

/// One instance of the equation: order k, exponent p0 ∈ (0, k), regularization
/// ε ≥ 0, data f (the t = 1 target), and the homotopy parameter t ∈ [0, 1].
#[derive(Clone, Debug)]
pub struct ProblemSpec {
    pub k: usize,
    pub p0: f64,
    pub eps: f64,
    pub t: f64,
    pub f: ScalarField,
}

impl ProblemSpec {
    pub fn new(k: usize, p0: f64, eps: f64, f: ScalarField, t: f64) -> Result<Self> {
        let n = f.grid.n();
        if k < 1 || k > n {
            return Err(Error::InvalidOrder { k, n });
        }
        if !(p0 > 0.0 && p0 < k as f64) {
            return Err(Error::OutOfRange(format!("p0={p0} must lie in (0, k={k})")));
        }
        if eps < 0.0 {
            return Err(Error::OutOfRange(format!("eps={eps} must be ≥ 0")));
        }
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::InvalidHomotopyParameter { t });
        }
        if let Some(node) = f.values.iter().position(|&v| !(v > 0.0)) {
            return Err(Error::NonpositiveSupport { min: f.values[node], node });
        }
        Ok(ProblemSpec { k, p0, eps, t, f })
    }

    pub fn n(&self) -> usize {
        self.f.grid.n()
    }

    pub fn grid(&self) -> &Arc<SphereGrid> {
        &self.f.grid
    }

    pub fn with_t(&self, t: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::InvalidHomotopyParameter { t });
        }
        let mut s = self.clone();
        s.t = t;
        Ok(s)
    }

    pub fn with_eps(&self, eps: f64) -> Self {
        let mut s = self.clone();
        s.eps = eps;
        s
    }

    /// The effective data f_t at this spec's homotopy parameter.
    pub fn f_t(&self) -> ScalarField {
        homotopy_f(self.t, &self.f, self.k, self.p0).expect("t validated at construction")
    }
}

/// Registered closed-form data, evaluated analytically at grid nodes.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FClosedForm {
    /// f ≡ value (default C(n,k), for which u ≡ 1 is the exact solution).
    Constant {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        value: Option<f64>,
    },
    /// The degenerate closed-form pair: f paired with u = (1−x_{n+1})^α,
    /// α = k/(k−p0). Requires p0 < k/2 so that f > 0.
    Prop53,
    /// f manufactured from the analytic target u = 1 + amplitude·x_{n+1}².
    Manufactured { amplitude: f64 },
    /// f = (1 + amplitude·P₂(x_{n+1}))^{−(k+p0)}; spherically convex data for
    /// small amplitudes, a convexity-certificate failure for large ones.
    Legendre2Bump { amplitude: f64 },
    /// f loaded from a ScalarField CSV.
    Csv { path: PathBuf },
}

impl FClosedForm {
    pub fn evaluate(&self, grid: &Arc<SphereGrid>, k: usize, p0: f64, eps: f64) -> Result<ScalarField> {
        let n = grid.n();
        match self {
            FClosedForm::Constant { value } => {
                let v = value.unwrap_or_else(|| binomial(n, k));
                Ok(ScalarField::constant(grid, v))
            }
            FClosedForm::Prop53 => prop53_example(grid, k, p0).map(|(_, f, _)| f),
            FClosedForm::Manufactured { amplitude } => {
                let a = *amplitude;
                Ok(ScalarField::from_fn(grid, |t, _| {
                    manufactured_f_value(t.cos(), n, k, p0, eps, a)
                }))
            }
            FClosedForm::Legendre2Bump { amplitude } => {
                let c = *amplitude;
                if !(-1.0..2.0).contains(&c) {
                    return Err(Error::OutOfRange(format!(
                        "legendre2_bump amplitude {c} outside (−1, 2); f would vanish"
                    )));
                }
                let q = k as f64 + p0;
                Ok(ScalarField::from_fn(grid, |t, _| {
                    let y = t.cos();
                    (1.0 + c * 0.5 * (3.0 * y * y - 1.0)).powf(-q)
                }))
            }
            FClosedForm::Csv { path } => ScalarField::from_csv(grid, path),
        }
    }
}

/// Analytic manufactured target u = 1 + a·x_{n+1}².
pub fn manufactured_target(grid: &Arc<SphereGrid>, amplitude: f64) -> ScalarField {
    ScalarField::from_fn(grid, |t, _| {
        let y = t.cos();
        1.0 + amplitude * y * y
    })
}

/// f = σ_k(W_u + εI)/u^{p0} for the manufactured target, from the exact
/// eigenvalues λ_r = 1 + 2a − 3a·y², λ_t = 1 − a·y² (multiplicity n−1).
pub fn manufactured_f_value(y: f64, n: usize, k: usize, p0: f64, eps: f64, a: f64) -> f64 {
    let lam_r = 1.0 + 2.0 * a - 3.0 * a * y * y + eps;
    let lam_t = 1.0 - a * y * y + eps;
    let mut eigs = vec![lam_t; n];
    eigs[0] = lam_r;
    let u = 1.0 + a * y * y;
    symfun::sigma_k_of_eigs(&eigs, k) / u.powf(p0)
}

/// First node (if any) at which W fails Γ_k membership.
pub fn first_inadmissible_node(w: &WField, k: usize) -> Option<usize> {
    for (node, m) in w.w.iter().enumerate() {
        let sig = symfun::sigma_all(m, k).expect("k ≤ n by construction");
        if sig[1..=k].iter().any(|&s| !(s > 0.0)) {
            return Some(node);
        }
    }
    None
}

/// Per-node residual σ_k(W_u^ε) − u^{p0}·f_t.
pub fn residual(u: &ScalarField, spec: &ProblemSpec) -> Result<ScalarField> {
    let w = covariant_w(u, spec.eps);
    residual_from_w(u, &w, spec)
}

/// Residual reusing an already-assembled W field (solver hot path).
pub fn residual_from_w(u: &ScalarField, w: &WField, spec: &ProblemSpec) -> Result<ScalarField> {
    if let Some(node) = u.values.iter().position(|&v| !(v > 0.0)) {
        return Err(Error::NonpositiveSupport { min: u.values[node], node });
    }
    let ft = spec.f_t();
    let k = spec.k;
    let p0 = spec.p0;
    let mut values = vec![0.0; u.values.len()];
    par_map_into(&mut values, |i| {
        let sk = symfun::sigma_all(&w.w[i], k).expect("k ≤ n")[k];
        sk - u.values[i].powf(p0) * ft.values[i]
    });
    Ok(ScalarField { grid: u.grid.clone(), values })
}

/// The assembled linearized operator
/// v ↦ σ_k^{ij}(W_u^ε)(W_v)_{ij} − p0·u^{p0−1}·f_t·v,
/// discretized with exactly the stencils of the residual, so it is the exact
/// Jacobian of the discrete residual.
pub struct LinearOperator {
    pub grid: Arc<SphereGrid>,
    banded: BandedMatrix,
}

impl LinearOperator {
    pub fn apply(&self, v: &ScalarField) -> ScalarField {
        ScalarField { grid: self.grid.clone(), values: self.banded.matvec(&v.values) }
    }

    /// Direct banded solve of L x = rhs.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let lu = self
            .banded
            .clone()
            .factor()
            .map_err(|e| Error::Config(format!("linear solve failed: {e}")))?;
        Ok(lu.solve(rhs))
    }

    pub fn to_dense(&self) -> Vec<f64> {
        self.banded.to_dense()
    }
}

/// Assembles the exact Jacobian at u. Requires u > 0 and W_u^ε ∈ Γ_k.
pub fn linearize(u: &ScalarField, spec: &ProblemSpec) -> Result<LinearOperator> {
    let w = covariant_w(u, spec.eps);
    linearize_from_w(u, &w, spec)
}

pub fn linearize_from_w(u: &ScalarField, w: &WField, spec: &ProblemSpec) -> Result<LinearOperator> {
    if let Some(node) = u.values.iter().position(|&v| !(v > 0.0)) {
        return Err(Error::NonpositiveSupport { min: u.values[node], node });
    }
    if let Some(node) = first_inadmissible_node(w, spec.k) {
        return Err(Error::NotInConeGammaK { k: spec.k, node });
    }
    let grid = &u.grid;
    let count = grid.node_count();
    // full-2d: the φ-wrap of the mixed-derivative corners couples (i, 0) to
    // (i+1, jp−1), index distance 2·jp−1; the band must cover it
    let (kl, ku) = match grid.kind() {
        GridKind::Axisym => (1, 1),
        GridKind::Full2d => {
            let jp = grid.resolution()[1];
            (2 * jp - 1, 2 * jp - 1)
        }
    };
    let mut banded = BandedMatrix::zeros(count, kl, ku);
    let ft = spec.f_t();
    let n = grid.n();
    for node in 0..count {
        let g = symfun::newton_transform(&w.w[node], spec.k - 1).expect("k−1 ≤ n");
        match grid.kind() {
            GridKind::Axisym => {
                let f_rr = g.get(0, 0);
                let f_tt_sum = (n as f64 - 1.0) * g.get(1, 1);
                for (comp, coef) in [(0usize, f_rr), (1usize, f_tt_sum)] {
                    let s = grid.w_component_stencil(node, comp);
                    for (&col, &c) in s.cols.iter().zip(&s.coeffs) {
                        banded.add(node, col, coef * c);
                    }
                }
            }
            GridKind::Full2d => {
                let coefs = [g.get(0, 0), 2.0 * g.get(0, 1), g.get(1, 1)];
                for (comp, coef) in coefs.iter().enumerate() {
                    let s = grid.w_component_stencil(node, comp);
                    for (&col, &c) in s.cols.iter().zip(&s.coeffs) {
                        banded.add(node, col, coef * c);
                    }
                }
            }
        }
        let zz = -spec.p0 * u.values[node].powf(spec.p0 - 1.0) * ft.values[node];
        banded.add(node, node, zz);
    }
    Ok(LinearOperator { grid: grid.clone(), banded })
}

/// The homotopy family
/// f_t = (t·f^{−1/(p0+k)} + (1−t)·C(n,k)^{−1/(p0+k)})^{−(p0+k)},
/// with f_0 ≡ C(n,k) and f_1 = f reproduced exactly.
pub fn homotopy_f(t: f64, f: &ScalarField, k: usize, p0: f64) -> Result<ScalarField> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidHomotopyParameter { t });
    }
    let n = f.grid.n();
    let c = binomial(n, k);
    if t == 0.0 {
        return Ok(ScalarField::constant(&f.grid, c));
    }
    if t == 1.0 {
        return Ok(f.clone());
    }
    let q = p0 + k as f64;
    let c_pow = c.powf(-1.0 / q);
    Ok(f.map(|v| (t * v.powf(-1.0 / q) + (1.0 - t) * c_pow).powf(-q)))
}

/// α = k/(k−p0) of the degenerate closed-form family.
pub fn prop53_alpha(k: usize, p0: f64) -> f64 {
    k as f64 / (k as f64 - p0)
}

/// u*(y) = (1−y)^α.
pub fn prop53_u_value(y: f64, alpha: f64) -> f64 {
    (1.0 - y).powf(alpha)
}

/// f*(y) = ((n−1)!/(k!(n−k)!))·(1+(α−1)y)^{k−1}·[n + kα(α−1) + (n+kα)(α−1)y].
pub fn prop53_f_value(y: f64, n: usize, k: usize, alpha: f64) -> f64 {
    let coef = binomial(n, k) / n as f64; // (n−1)!/(k!(n−k)!)
    let a1 = alpha - 1.0;
    let nk = n as f64 + k as f64 * alpha;
    coef * (1.0 + a1 * y).powi(k as i32 - 1)
        * (n as f64 + k as f64 * alpha * a1 + nk * a1 * y)
}

/// The exact degenerate pair (u*, f*) sampled at the grid nodes; u* solves
/// the equation with data f* analytically, vanishes at the north pole, and
/// its W field loses rank there.
pub fn prop53_example(
    grid: &Arc<SphereGrid>,
    k: usize,
    p0: f64,
) -> Result<(ScalarField, ScalarField, f64)> {
    let n = grid.n();
    if k < 1 || k > n {
        return Err(Error::InvalidOrder { k, n });
    }
    if !(p0 > 0.0 && 2.0 * p0 < k as f64) {
        return Err(Error::PositivityLost { p0, half_k: k as f64 / 2.0 });
    }
    let alpha = prop53_alpha(k, p0);
    let u = ScalarField::from_fn(grid, |t, _| prop53_u_value(t.cos(), alpha));
    let f = ScalarField::from_fn(grid, |t, _| prop53_f_value(t.cos(), n, k, alpha));
    Ok((u, f, alpha))
}

/// Coefficients (q0, q1, q2) of the quadratic Q(y) whose positivity on
/// [−1, 1] is equivalent to the convexity condition for the closed-form f*,
/// together with min Q on [−1, 1].
pub fn prop53_q(n: usize, k: usize, p0: f64) -> ([f64; 3], f64) {
    let a = prop53_alpha(k, p0);
    let kf = k as f64;
    let nf = n as f64;
    let a1 = a - 1.0;
    let q2 = kf * (3.0 * a - 1.0) * a1 * a1 * (nf + kf * a);
    let q1 = kf
        * a1
        * (a * (nf + (kf - 1.0) * a * a1 + a) + (2.0 * a - 1.0) * (2.0 * nf + kf * a * a));
    let q0 = kf * (2.0 * a - 1.0) * (nf + kf * a * a1);
    let q = |y: f64| q0 + q1 * y + q2 * y * y;
    let mut qmin = q(-1.0).min(q(1.0));
    if q2 > 0.0 {
        let yv = -q1 / (2.0 * q2);
        if (-1.0..=1.0).contains(&yv) {
            qmin = qmin.min(q(yv));
        }
    }
    ([q0, q1, q2], qmin)
}

/// Largest p0 in (0, k/2) for which the closed-form data still satisfies the
/// convexity condition (Q > 0 on [−1, 1]), found by bisection to 1e−6.
/// The theory only asserts existence of such a threshold; this reports the
/// empirical value.
pub fn prop53_empirical_pbar(n: usize, k: usize) -> f64 {
    let passes = |p0: f64| prop53_q(n, k, p0).1 > 0.0;
    let kf = k as f64;
    let mut lo = 1e-9;
    let mut hi = kf / 2.0 - 1e-9;
    if passes(hi) {
        return hi;
    }
    debug_assert!(passes(lo));
    while hi - lo > 1e-6 {
        let mid = 0.5 * (lo + hi);
        if passes(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Certificate for the convexity condition
/// (∇² f^{−1/(k+p0)} + f^{−1/(k+p0)} g) ≥ 0.
#[derive(Clone, Debug, Serialize)]
pub struct ConvexityCertificate {
    pub min_eigenvalue_of_w_gtilde: f64,
    /// Q(y) quadratic coefficients (q0, q1, q2); present only for the
    /// closed-form family where Q is derived.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_coefficients: Option<[f64; 3]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_min_on_interval: Option<f64>,
    pub passes: bool,
}

/// Evaluates the convexity condition for data f: builds g̃ = f^{−1/(k+p0)},
/// assembles W_g̃ with ε = 0, and reports the grid minimum eigenvalue.
/// Discrete eigenvalues of a semidefinite field can dip slightly negative, so
/// the pass threshold is −1e−9·(1+‖g̃‖_∞).
pub fn check_f_convexity(f: &ScalarField, k: usize, p0: f64) -> Result<ConvexityCertificate> {
    if let Some(node) = f.values.iter().position(|&v| !(v > 0.0)) {
        return Err(Error::NonpositiveSupport { min: f.values[node], node });
    }
    let q = -(1.0 / (k as f64 + p0));
    let gtilde = f.map(|v| v.powf(q));
    let w = covariant_w(&gtilde, 0.0);
    let min_eig = w.eig_min.iter().cloned().fold(f64::INFINITY, f64::min);
    let tol = 1e-9 * (1.0 + gtilde.sup_norm());
    Ok(ConvexityCertificate {
        min_eigenvalue_of_w_gtilde: min_eig,
        q_coefficients: None,
        q_min_on_interval: None,
        passes: min_eig >= -tol,
    })
}

impl ConvexityCertificate {
    /// Attaches the closed-form Q(y) data (only meaningful when f is the
    /// degenerate closed-form family).
    pub fn with_prop53_q(mut self, n: usize, k: usize, p0: f64) -> Self {
        let (coeffs, qmin) = prop53_q(n, k, p0);
        self.q_coefficients = Some(coeffs);
        self.q_min_on_interval = Some(qmin);
        self
    }
}

/// Sup-norm of the residual of the closed-form pair over nodes with
/// θ ≥ theta_min; used by convergence studies (`verify-example`).
pub fn prop53_residual_sup(
    grid: &Arc<SphereGrid>,
    k: usize,
    p0: f64,
    theta_min: f64,
) -> Result<f64> {
    let (u, f, _) = prop53_example(grid, k, p0)?;
    let spec = ProblemSpec::new(k, p0, 0.0, f, 1.0)?;
    let r = residual(&u, &spec)?;
    Ok(r
        .values
        .iter()
        .enumerate()
        .filter(|(i, _)| grid.theta(*i) >= theta_min)
        .map(|(_, v)| v.abs())
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spheregrid::integrate;

    fn axisym(n: usize, j: usize) -> Arc<SphereGrid> {
        SphereGrid::build(n, GridKind::Axisym, &[j]).unwrap()
    }

    fn full2d(jt: usize, jp: usize) -> Arc<SphereGrid> {
        SphereGrid::build(2, GridKind::Full2d, &[jt, jp]).unwrap()
    }

    #[test]
    fn residual_zero_at_round_sphere() {
        for grid in [axisym(3, 64), full2d(16, 32) as Arc<SphereGrid>] {
            let n = grid.n();
            let k = n - 1;
            let f = ScalarField::constant(&grid, binomial(n, k));
            let spec = ProblemSpec::new(k, 0.5, 0.0, f, 1.0).unwrap();
            let u = ScalarField::constant(&grid, 1.0);
            let r = residual(&u, &spec).unwrap();
            assert_eq!(r.sup_norm(), 0.0); // exact: σ_k(I) = C(n,k) in f64
        }
    }

    #[test]
    fn residual_rejects_nonpositive_u() {
        let grid = axisym(3, 32);
        let f = ScalarField::constant(&grid, 3.0);
        let spec = ProblemSpec::new(2, 0.5, 0.0, f, 1.0).unwrap();
        let u = ScalarField::from_fn(&grid, |t, _| t.cos()); // negative on half the sphere
        assert!(matches!(residual(&u, &spec), Err(Error::NonpositiveSupport { .. })));
    }

    #[test]
    fn residual_linear_in_f() {
        let grid = axisym(3, 64);
        let f = ScalarField::from_fn(&grid, |t, _| 3.0 + 0.5 * t.cos() * t.cos());
        let u = ScalarField::from_fn(&grid, |t, _| 1.0 + 0.05 * t.cos() * t.cos());
        let spec1 = ProblemSpec::new(2, 0.5, 0.0, f.clone(), 1.0).unwrap();
        let spec2 = ProblemSpec::new(2, 0.5, 0.0, f.map(|v| 2.0 * v), 1.0).unwrap();
        let r1 = residual(&u, &spec1).unwrap();
        let r2 = residual(&u, &spec2).unwrap();
        // r2 − r1 = −u^{p0}·f at each node
        for i in 0..grid.node_count() {
            let expect = -u.values[i].powf(0.5) * f.values[i];
            let got = r2.values[i] - r1.values[i];
            assert!((got - expect).abs() <= 1e-12 * (1.0 + expect.abs()));
        }
    }

    #[test]
    fn residual_scaling_law() {
        // if (u, f) has zero residual with ε = 0, so does (λu, λ^{k−p0}f)
        let grid = axisym(3, 64);
        let k = 2;
        let p0 = 0.5;
        let u = ScalarField::from_fn(&grid, |t, _| 1.0 + 0.05 * t.cos() * t.cos());
        // discrete manufactured data: f := σ_k(W_u)/u^{p0}
        let w = covariant_w(&u, 0.0);
        let f = ScalarField {
            grid: grid.clone(),
            values: (0..grid.node_count())
                .map(|i| symfun::sigma_all(&w.w[i], k).unwrap()[k] / u.values[i].powf(p0))
                .collect(),
        };
        let lam: f64 = 2.0;
        let spec =
            ProblemSpec::new(k, p0, 0.0, f.map(|v| lam.powf(k as f64 - p0) * v), 1.0).unwrap();
        let r = residual(&u.map(|v| lam * v), &spec).unwrap();
        assert!(r.sup_norm() <= 1e-10, "scaled residual {}", r.sup_norm());
    }

    #[test]
    fn homotopy_endpoints_exact() {
        let grid = axisym(3, 32);
        let f = ScalarField::from_fn(&grid, |t, _| 2.0 + t.cos() * t.cos());
        let f0 = homotopy_f(0.0, &f, 2, 0.5).unwrap();
        assert!(f0.values.iter().all(|&v| v == 3.0));
        let f1 = homotopy_f(1.0, &f, 2, 0.5).unwrap();
        assert_eq!(f1.values, f.values);
        assert!(matches!(
            homotopy_f(1.5, &f, 2, 0.5),
            Err(Error::InvalidHomotopyParameter { .. })
        ));
    }

    #[test]
    fn homotopy_preserves_evenness_and_convexity() {
        let grid = axisym(2, 128);
        let form = FClosedForm::Legendre2Bump { amplitude: 0.3 };
        let f = form.evaluate(&grid, 1, 0.5, 0.0).unwrap();
        assert!(crate::spheregrid::evenness_defect(&f) < 1e-15);
        assert!(check_f_convexity(&f, 1, 0.5).unwrap().passes);
        for t in [0.25, 0.5, 0.75] {
            let ft = homotopy_f(t, &f, 1, 0.5).unwrap();
            assert!(crate::spheregrid::evenness_defect(&ft) < 1e-14);
            assert!(check_f_convexity(&ft, 1, 0.5).unwrap().passes, "t={t}");
            assert!(ft.values.iter().all(|&v| v > 0.0));
        }
    }

    #[test]
    fn homotopy_monotone_when_f_below_constant() {
        let grid = axisym(3, 32);
        let c = binomial(3, 2);
        let f = ScalarField::constant(&grid, 0.8 * c);
        let mut prev = homotopy_f(0.0, &f, 2, 0.5).unwrap();
        for i in 1..=10 {
            let t = i as f64 / 10.0;
            let ft = homotopy_f(t, &f, 2, 0.5).unwrap();
            for node in 0..grid.node_count() {
                assert!(ft.values[node] <= prev.values[node] + 1e-12);
            }
            prev = ft;
        }
    }

    #[test]
    fn prop53_worked_values() {
        let grid = axisym(3, 128);
        let (u, f, alpha) = prop53_example(&grid, 2, 0.2).unwrap();
        assert!((alpha - 10.0 / 9.0).abs() < 1e-15);
        // f*(0) = 263/81
        assert!((prop53_f_value(0.0, 3, 2, alpha) - 263.0 / 81.0).abs() < 1e-13);
        // u vanishes at the north pole (y = 1) and is positive at all nodes
        assert_eq!(prop53_u_value(1.0, alpha), 0.0);
        assert!(u.values.iter().all(|&v| v > 0.0));
        assert!(f.values.iter().all(|&v| v > 0.0));
        // rejected outside the positivity range
        assert!(matches!(prop53_example(&grid, 2, 1.2), Err(Error::PositivityLost { .. })));
    }

    #[test]
    fn prop53_residual_second_order_in_smooth_region() {
        let e1 = prop53_residual_sup(&axisym(3, 128), 2, 0.2, 0.2).unwrap();
        let e2 = prop53_residual_sup(&axisym(3, 256), 2, 0.2, 0.2).unwrap();
        assert!(e1 / e2 >= 3.5, "ratio {} ({e1} vs {e2})", e1 / e2);
    }

    #[test]
    fn convexity_certificate_cases() {
        let grid = axisym(3, 256);
        // constant data passes
        let fc = ScalarField::constant(&grid, 3.0);
        assert!(check_f_convexity(&fc, 2, 0.5).unwrap().passes);

        // closed-form degenerate data at small p0 passes with Q > 0
        let (_, f, _) = prop53_example(&grid, 2, 0.1).unwrap();
        let cert = check_f_convexity(&f, 2, 0.1).unwrap().with_prop53_q(3, 2, 0.1);
        assert!(cert.passes, "min eig {}", cert.min_eigenvalue_of_w_gtilde);
        assert!(cert.q_min_on_interval.unwrap() > 0.0);

        // large Legendre bump fails with a negative eigenvalue
        let g2 = full2d(64, 128);
        let fbad = FClosedForm::Legendre2Bump { amplitude: 0.9 }
            .evaluate(&g2, 1, 0.5, 0.0)
            .unwrap();
        let cert = check_f_convexity(&fbad, 1, 0.5).unwrap();
        assert!(!cert.passes);
        assert!(cert.min_eigenvalue_of_w_gtilde < -0.5); // −0.8 analytically at the poles
    }

    #[test]
    fn prop53_q_consistent_with_eigenvalue_route() {
        // Q > 0 on [−1,1] iff the eigenvalue certificate passes
        let grid = axisym(3, 256);
        for p0 in [0.1, 0.3, 0.5, 0.9] {
            let (_, f, _) = prop53_example(&grid, 2, p0).unwrap();
            let eig_pass = check_f_convexity(&f, 2, p0).unwrap().passes;
            let (_, qmin) = prop53_q(3, 2, p0);
            assert_eq!(eig_pass, qmin > 0.0, "p0={p0}, qmin={qmin}");
        }
    }

    #[test]
    fn empirical_pbar_in_expected_window() {
        let pbar = prop53_empirical_pbar(3, 2);
        assert!(pbar > 0.5 && pbar < 1.0, "pbar = {pbar}");
        // certificate passes just below, fails just above
        assert!(prop53_q(3, 2, pbar - 1e-3).1 > 0.0);
        assert!(prop53_q(3, 2, pbar + 1e-3).1 <= 0.0);
    }

    #[test]
    fn linearize_constant_solution_harmonic() {
        // at u ≡ 1, f ≡ C(n,k): L v = −p0·C(n,k)·v for the first harmonic v = x_{n+1}
        for (grid, tol) in [(axisym(3, 128), 1e-3), (full2d(32, 64) as Arc<SphereGrid>, 1.5e-2)] {
            let n = grid.n();
            let k = n - 1;
            let p0 = 0.5;
            let c = binomial(n, k);
            let spec = ProblemSpec::new(k, p0, 0.0, ScalarField::constant(&grid, c), 1.0).unwrap();
            let u = ScalarField::constant(&grid, 1.0);
            let op = linearize(&u, &spec).unwrap();
            let v = ScalarField::from_fn(&grid, |t, _| t.cos());
            let lv = op.apply(&v);
            let err = (0..grid.node_count())
                .map(|i| (lv.values[i] + p0 * c * v.values[i]).abs())
                .fold(0.0, f64::max);
            assert!(err < tol, "kind {:?}: err {err}", grid.kind());
        }
    }

    #[test]
    fn linearize_rejects_inadmissible() {
        let grid = axisym(3, 64);
        let spec = ProblemSpec::new(2, 0.5, 0.0, ScalarField::constant(&grid, 3.0), 1.0).unwrap();
        // large second harmonic drives W out of Γ₂
        let u = ScalarField::from_fn(&grid, |t, _| {
            let y = t.cos();
            1.0 + 1.5 * (3.0 * y * y - 1.0) / 2.0
        });
        assert!(matches!(linearize(&u, &spec), Err(Error::NotInConeGammaK { .. })));
    }

    #[test]
    fn linearize_is_directional_derivative_of_residual() {
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for grid in [axisym(3, 64), full2d(16, 32) as Arc<SphereGrid>] {
            let n = grid.n();
            let k = n - 1;
            let f = ScalarField::from_fn(&grid, |t, _| {
                binomial(n, k) * (1.0 + 0.2 * t.cos() * t.cos())
            });
            let spec = ProblemSpec::new(k, 0.5, 0.0, f, 1.0).unwrap();
            let u = ScalarField::from_fn(&grid, |t, _| 1.0 + 0.08 * t.cos() * t.cos());
            let op = linearize(&u, &spec).unwrap();
            let v = ScalarField {
                grid: grid.clone(),
                values: (0..grid.node_count()).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            };
            let r0 = residual(&u, &spec).unwrap();
            let lv = op.apply(&v);
            let err_at = |s: f64| -> f64 {
                let us = u.zip(&v, |a, b| a + s * b);
                let rs = residual(&us, &spec).unwrap();
                (0..grid.node_count())
                    .map(|i| ((rs.values[i] - r0.values[i]) / s - lv.values[i]).abs())
                    .fold(0.0, f64::max)
            };
            let e4 = err_at(1e-4);
            let e5 = err_at(1e-5);
            // first-order agreement: the defect scales like s
            assert!(e4 / e5 > 5.0 && e4 / e5 < 20.0, "ratio {} ({e4} vs {e5})", e4 / e5);
        }
    }

    #[test]
    fn linearize_weighted_asymmetry_vanishes_at_second_order() {
        // ⟨Lv, w⟩_w − ⟨v, Lw⟩_w → 0 at O(h²): the continuous operator is
        // self-adjoint in the quadrature-weighted inner product.
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        let asym = |j: usize| -> f64 {
            let grid = axisym(3, j);
            let spec =
                ProblemSpec::new(2, 0.5, 0.0, ScalarField::constant(&grid, 3.0), 1.0).unwrap();
            let u = ScalarField::from_fn(&grid, |t, _| 1.0 + 0.08 * t.cos() * t.cos());
            let op = linearize(&u, &spec).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(13);
            let mut mk = || {
                let a: f64 = rng.gen_range(-1.0..1.0);
                let b: f64 = rng.gen_range(-1.0..1.0);
                let c: f64 = rng.gen_range(-1.0..1.0);
                ScalarField::from_fn(&grid, move |t, _| a + b * t.cos() + c * (2.0 * t).cos())
            };
            let v = mk();
            let w = mk();
            let lv = op.apply(&v);
            let lw = op.apply(&w);
            let ip = |x: &ScalarField, y: &ScalarField| -> f64 { integrate(&x.zip(y, |a, b| a * b)) };
            (ip(&lv, &w) - ip(&v, &lw)).abs()
        };
        let (a1, a2) = (asym(64), asym(128));
        assert!(a1 / a2 >= 3.0, "asymmetry ratio {} ({a1} vs {a2})", a1 / a2);
    }

    #[test]
    fn linearize_kernel_bounded_away_from_zero_at_constant() {
        // smallest singular value at u ≡ 1 stays ≥ 0.5·p0·C(n,k)
        let grid = axisym(3, 64);
        let p0 = 0.5;
        let c = binomial(3, 2);
        let spec = ProblemSpec::new(2, p0, 0.0, ScalarField::constant(&grid, c), 1.0).unwrap();
        let u = ScalarField::constant(&grid, 1.0);
        let op = linearize(&u, &spec).unwrap();
        let n = grid.node_count();
        let dense = nalgebra::DMatrix::from_row_slice(n, n, &op.to_dense());
        let svd = dense.svd(false, false);
        let smin = svd.singular_values.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(smin >= 0.5 * p0 * c, "σ_min = {smin}");
    }

    #[test]
    fn closed_form_registry_constant_default() {
        let grid = axisym(3, 32);
        let f = FClosedForm::Constant { value: None }.evaluate(&grid, 2, 0.5, 0.0).unwrap();
        assert!(f.values.iter().all(|&v| v == 3.0));
    }

    #[test]
    fn manufactured_pair_residual_second_order() {
        // residual of the analytic manufactured pair is O(h²), not zero
        let err = |j: usize| -> f64 {
            let grid = axisym(3, j);
            let f = FClosedForm::Manufactured { amplitude: 0.1 }
                .evaluate(&grid, 2, 0.5, 0.0)
                .unwrap();
            let spec = ProblemSpec::new(2, 0.5, 0.0, f, 1.0).unwrap();
            let u = manufactured_target(&grid, 0.1);
            residual(&u, &spec).unwrap().sup_norm()
        };
        let (e1, e2) = (err(64), err(128));
        assert!(e1 / e2 >= 3.5, "ratio {}", e1 / e2);
    }
}
