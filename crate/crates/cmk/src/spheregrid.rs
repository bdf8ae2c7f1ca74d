//! Structured discretizations of Sⁿ with covariant derivative operators,
//! quadrature, and antipodal symmetrization.
//!
//! Two grid kinds:
//!
//! - **axisymmetric 1-D** (any n ∈ {2,3}): cell-centered colatitude nodes
//!   θ_j = (j+½)·π/J. Fields depend on θ only; `W_u` is diagonal with radial
//!   eigenvalue u″+u+ε (multiplicity 1) and tangential eigenvalue
//!   cotθ·u′+u+ε (multiplicity n−1).
//! - **full 2-D** (n = 2 only): cell-centered lat–lon nodes; the Hessian in
//!   the orthonormal frame {∂_θ, (1/sinθ)∂_φ} is assembled from second-order
//!   central differences with the standard pole treatment (ghost rows use the
//!   φ → φ+π shifted row).
//!
//! Cell-centered nodes never sit on a pole, so cotθ stays finite everywhere.
//! Resolutions must be even so the antipodal map x ↦ −x is an exact node
//! permutation.

use crate::error::{Error, Result};
use crate::symfun::SymMatrix;
use crate::threads::par_map_into;
use std::io::{BufRead, Write};
use std::path::Path;
use std::sync::Arc;

pub const MIN_RESOLUTION: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridKind {
    /// 1-D in colatitude; valid for any supported n.
    Axisym,
    /// Full lat–lon grid; n = 2 only.
    Full2d,
}

impl std::fmt::Display for GridKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GridKind::Axisym => write!(f, "axisym"),
            GridKind::Full2d => write!(f, "full2d"),
        }
    }
}

/// Structured discretization of Sⁿ (n = 2 or 3).
#[derive(Debug)]
pub struct SphereGrid {
    n: usize,
    kind: GridKind,
    jt: usize,
    jp: usize, // 0 for axisymmetric grids
    ht: f64,
    hp: f64,
    theta: Vec<f64>,
    phi: Vec<f64>,
    weights: Vec<f64>,
    antipode: Vec<usize>,
}

/// End-corrected midpoint weights in the colatitude direction.
///
/// For G(θ) = g(θ)·sin^{n−1}θ the composite midpoint rule satisfies
/// ∫₀^π G = h·ΣG(θ_j) + (h²/24)[G′(π) − G′(0)] + O(h⁴). With n = 3 the pole
/// derivatives vanish for any g smooth on the sphere, so the plain rule is
/// already O(h⁴). With n = 2, G′(0) = g(0) and G′(π) = −g(π); folding the
/// even quadratic pole extrapolation g(0) ≈ (9g₀ − g₁)/8 into the first and
/// last two node weights restores O(h⁴) while keeping the rule a plain
/// Σ values·weights. `stride` is the distance between consecutive θ-rows
/// (1 for axisymmetric grids, Jφ for the full 2-D grid) and `ring` the
/// measure carried by one node's ring/cell.
fn apply_pole_correction(n: usize, weights: &mut [f64], jt: usize, stride: usize, ht: f64, ring: f64) {
    if n != 2 {
        return;
    }
    let c = ring * ht * ht / 24.0;
    for col in 0..stride {
        weights[col] -= c * 9.0 / 8.0;
        weights[stride + col] += c / 8.0;
        weights[(jt - 1) * stride + col] -= c * 9.0 / 8.0;
        weights[(jt - 2) * stride + col] += c / 8.0;
    }
}

/// |S^{n}| for the unit n-sphere.
pub fn sphere_area(n: usize) -> f64 {
    match n {
        1 => 2.0 * std::f64::consts::PI,
        2 => 4.0 * std::f64::consts::PI,
        3 => 2.0 * std::f64::consts::PI * std::f64::consts::PI,
        _ => panic!("sphere_area implemented for n ≤ 3"),
    }
}

impl SphereGrid {
    /// Builds a grid. `resolution` is `[J]` for axisymmetric grids and
    /// `[Jθ, Jφ]` for the full 2-D grid.
    pub fn build(n: usize, kind: GridKind, resolution: &[usize]) -> Result<Arc<SphereGrid>> {
        if !(n == 2 || n == 3) {
            return Err(Error::UnsupportedGrid { kind: kind.to_string(), n });
        }
        if kind == GridKind::Full2d && n != 2 {
            return Err(Error::UnsupportedGrid { kind: kind.to_string(), n });
        }
        let expected_axes = match kind {
            GridKind::Axisym => 1,
            GridKind::Full2d => 2,
        };
        if resolution.len() != expected_axes {
            return Err(Error::Config(format!(
                "grid kind {kind} expects {expected_axes} resolution entries, got {}",
                resolution.len()
            )));
        }
        for &r in resolution {
            if r < MIN_RESOLUTION || r % 2 != 0 {
                return Err(Error::InvalidResolution { res: r });
            }
        }
        let pi = std::f64::consts::PI;
        match kind {
            GridKind::Axisym => {
                let jt = resolution[0];
                let ht = pi / jt as f64;
                let theta: Vec<f64> = (0..jt).map(|j| (j as f64 + 0.5) * ht).collect();
                let ring = sphere_area(n - 1);
                let mut weights: Vec<f64> = theta
                    .iter()
                    .map(|&t| ring * t.sin().powi(n as i32 - 1) * ht)
                    .collect();
                apply_pole_correction(n, &mut weights, jt, 1, ht, ring);
                let antipode: Vec<usize> = (0..jt).map(|j| jt - 1 - j).collect();
                Ok(Arc::new(SphereGrid {
                    n,
                    kind,
                    jt,
                    jp: 0,
                    ht,
                    hp: 0.0,
                    theta,
                    phi: Vec::new(),
                    weights,
                    antipode,
                }))
            }
            GridKind::Full2d => {
                let (jt, jp) = (resolution[0], resolution[1]);
                let ht = pi / jt as f64;
                let hp = 2.0 * pi / jp as f64;
                let mut theta = Vec::with_capacity(jt * jp);
                let mut phi = Vec::with_capacity(jt * jp);
                let mut weights = Vec::with_capacity(jt * jp);
                let mut antipode = Vec::with_capacity(jt * jp);
                for i in 0..jt {
                    let t = (i as f64 + 0.5) * ht;
                    for m in 0..jp {
                        let p = (m as f64 + 0.5) * hp;
                        theta.push(t);
                        phi.push(p);
                        weights.push(t.sin() * ht * hp);
                        antipode.push((jt - 1 - i) * jp + (m + jp / 2) % jp);
                    }
                }
                apply_pole_correction(n, &mut weights, jt, jp, ht, hp);
                Ok(Arc::new(SphereGrid {
                    n,
                    kind,
                    jt,
                    jp,
                    ht,
                    hp,
                    theta,
                    phi,
                    weights,
                    antipode,
                }))
            }
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn node_count(&self) -> usize {
        self.theta.len()
    }

    pub fn resolution(&self) -> Vec<usize> {
        match self.kind {
            GridKind::Axisym => vec![self.jt],
            GridKind::Full2d => vec![self.jt, self.jp],
        }
    }

    pub fn theta_step(&self) -> f64 {
        self.ht
    }

    pub fn theta(&self, node: usize) -> f64 {
        self.theta[node]
    }

    pub fn phi(&self, node: usize) -> f64 {
        match self.kind {
            GridKind::Axisym => 0.0,
            GridKind::Full2d => self.phi[node],
        }
    }

    pub fn weight(&self, node: usize) -> f64 {
        self.weights[node]
    }

    pub fn antipode(&self, node: usize) -> usize {
        self.antipode[node]
    }

    /// Total quadrature mass Σ w_j (discrete |Sⁿ|).
    pub fn area(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Ambient coordinates of a node (length n+1; last entry is x_{n+1} = cosθ).
    /// Axisymmetric nodes sit on the φ = 0 meridian.
    pub fn ambient(&self, node: usize) -> Vec<f64> {
        let t = self.theta[node];
        match self.kind {
            GridKind::Axisym => {
                let mut x = vec![0.0; self.n + 1];
                x[0] = t.sin();
                x[self.n] = t.cos();
                x
            }
            GridKind::Full2d => {
                let p = self.phi[node];
                vec![t.sin() * p.cos(), t.sin() * p.sin(), t.cos()]
            }
        }
    }

    /// Geodesic distance between two nodes.
    pub fn geodesic_dist(&self, a: usize, b: usize) -> f64 {
        match self.kind {
            GridKind::Axisym => (self.theta[a] - self.theta[b]).abs(),
            GridKind::Full2d => {
                let xa = self.ambient(a);
                let xb = self.ambient(b);
                let dot: f64 = xa.iter().zip(&xb).map(|(x, y)| x * y).sum();
                dot.clamp(-1.0, 1.0).acos()
            }
        }
    }

    #[inline]
    fn axisym_ghost(&self, j: isize) -> usize {
        // even reflection across both poles
        if j < 0 {
            (-j - 1) as usize
        } else if j as usize >= self.jt {
            2 * self.jt - 1 - j as usize
        } else {
            j as usize
        }
    }

    /// Node index for logical (i, m) with pole/periodic ghost resolution.
    #[inline]
    fn full2d_ghost(&self, i: isize, m: isize) -> usize {
        let jp = self.jp as isize;
        let mut mm = m.rem_euclid(jp) as usize;
        let ii = if i < 0 {
            mm = (mm + self.jp / 2) % self.jp;
            (-i - 1) as usize
        } else if i as usize >= self.jt {
            mm = (mm + self.jp / 2) % self.jp;
            2 * self.jt - 1 - i as usize
        } else {
            i as usize
        };
        ii * self.jp + mm
    }
}

/// Stencil of one row of a discrete operator: column indices and coefficients
/// after ghost resolution (duplicate columns possible; assembly adds them).
pub(crate) struct StencilRow {
    pub cols: Vec<usize>,
    pub coeffs: Vec<f64>,
}

impl SphereGrid {
    /// Columns/coefficients of the discrete (W_v)_{ab} entries for a row,
    /// as used by both `covariant_w` (applied to values) and the exact
    /// Jacobian assembly. `comp` indexes the independent W components:
    /// axisym: 0 = radial (u″+u), 1 = tangential (cotθ·u′+u);
    /// full2d: 0 = θθ, 1 = θφ, 2 = φφ. The `u + ε` part contributes the
    /// diagonal `1` (ε enters only the value, not the derivative).
    pub(crate) fn w_component_stencil(&self, node: usize, comp: usize) -> StencilRow {
        let mut cols = Vec::with_capacity(9);
        let mut coeffs = Vec::with_capacity(9);
        match self.kind {
            GridKind::Axisym => {
                let j = node as isize;
                let h = self.ht;
                match comp {
                    0 => {
                        // u″ + u
                        cols.extend_from_slice(&[
                            self.axisym_ghost(j - 1),
                            node,
                            self.axisym_ghost(j + 1),
                        ]);
                        coeffs.extend_from_slice(&[1.0 / (h * h), -2.0 / (h * h) + 1.0, 1.0 / (h * h)]);
                    }
                    1 => {
                        // cotθ·u′ + u
                        let ct = 1.0 / self.theta[node].tan();
                        cols.extend_from_slice(&[
                            self.axisym_ghost(j - 1),
                            node,
                            self.axisym_ghost(j + 1),
                        ]);
                        coeffs.extend_from_slice(&[-ct / (2.0 * h), 1.0, ct / (2.0 * h)]);
                    }
                    _ => unreachable!(),
                }
            }
            GridKind::Full2d => {
                let i = (node / self.jp) as isize;
                let m = (node % self.jp) as isize;
                let (ht, hp) = (self.ht, self.hp);
                let t = self.theta[node];
                let (st, ct) = (t.sin(), 1.0 / t.tan());
                match comp {
                    0 => {
                        // u_θθ + u
                        cols.extend_from_slice(&[
                            self.full2d_ghost(i - 1, m),
                            node,
                            self.full2d_ghost(i + 1, m),
                        ]);
                        coeffs.extend_from_slice(&[
                            1.0 / (ht * ht),
                            -2.0 / (ht * ht) + 1.0,
                            1.0 / (ht * ht),
                        ]);
                    }
                    1 => {
                        // (u_θφ − cotθ·u_φ)/sinθ
                        let cx = 1.0 / (4.0 * ht * hp * st);
                        cols.extend_from_slice(&[
                            self.full2d_ghost(i + 1, m + 1),
                            self.full2d_ghost(i + 1, m - 1),
                            self.full2d_ghost(i - 1, m + 1),
                            self.full2d_ghost(i - 1, m - 1),
                            self.full2d_ghost(i, m + 1),
                            self.full2d_ghost(i, m - 1),
                        ]);
                        coeffs.extend_from_slice(&[
                            cx,
                            -cx,
                            -cx,
                            cx,
                            -ct / (2.0 * hp * st),
                            ct / (2.0 * hp * st),
                        ]);
                    }
                    2 => {
                        // u_φφ/sin²θ + cotθ·u_θ + u
                        let cp = 1.0 / (hp * hp * st * st);
                        cols.extend_from_slice(&[
                            self.full2d_ghost(i, m + 1),
                            node,
                            self.full2d_ghost(i, m - 1),
                            self.full2d_ghost(i + 1, m),
                            self.full2d_ghost(i - 1, m),
                        ]);
                        coeffs.extend_from_slice(&[
                            cp,
                            -2.0 * cp + 1.0,
                            cp,
                            ct / (2.0 * ht),
                            -ct / (2.0 * ht),
                        ]);
                    }
                    _ => unreachable!(),
                }
            }
        }
        StencilRow { cols, coeffs }
    }

    pub(crate) fn w_component_count(&self) -> usize {
        match self.kind {
            GridKind::Axisym => 2,
            GridKind::Full2d => 3,
        }
    }
}

/// Real values sampled at the grid nodes.
#[derive(Clone, Debug)]
pub struct ScalarField {
    pub grid: Arc<SphereGrid>,
    pub values: Vec<f64>,
}

impl ScalarField {
    pub fn constant(grid: &Arc<SphereGrid>, c: f64) -> Self {
        ScalarField { grid: grid.clone(), values: vec![c; grid.node_count()] }
    }

    /// Samples `f(θ, φ)` at every node.
    pub fn from_fn(grid: &Arc<SphereGrid>, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = (0..grid.node_count()).map(|i| f(grid.theta(i), grid.phi(i))).collect();
        ScalarField { grid: grid.clone(), values }
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |a, &v| a.max(v.abs()))
    }

    pub fn argmin(&self) -> usize {
        let mut best = 0;
        for (i, &v) in self.values.iter().enumerate() {
            if v < self.values[best] {
                best = i;
            }
        }
        best
    }

    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &v) in self.values.iter().enumerate() {
            if v > self.values[best] {
                best = i;
            }
        }
        best
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        ScalarField { grid: self.grid.clone(), values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn zip(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Self {
        assert!(Arc::ptr_eq(&self.grid, &other.grid) || self.grid.node_count() == other.grid.node_count());
        ScalarField {
            grid: self.grid.clone(),
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    pub fn sub(&self, other: &ScalarField) -> Self {
        self.zip(other, |a, b| a - b)
    }

    /// Writes `theta[,phi],value` CSV, one node per row, θ outer / φ inner.
    /// Floats use Rust's shortest round-trip formatting, so re-importing
    /// reproduces the values bit-exactly.
    pub fn to_csv(&self, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        match self.grid.kind() {
            GridKind::Axisym => {
                writeln!(out, "theta,value")?;
                for (i, v) in self.values.iter().enumerate() {
                    writeln!(out, "{},{}", self.grid.theta(i), v)?;
                }
            }
            GridKind::Full2d => {
                writeln!(out, "theta,phi,value")?;
                for (i, v) in self.values.iter().enumerate() {
                    writeln!(out, "{},{},{}", self.grid.theta(i), self.grid.phi(i), v)?;
                }
            }
        }
        Ok(())
    }

    /// Reads a CSV produced by [`ScalarField::to_csv`]; node coordinates must
    /// match the grid.
    pub fn from_csv(grid: &Arc<SphereGrid>, path: &Path) -> Result<Self> {
        let file = std::io::BufReader::new(std::fs::File::open(path)?);
        let mut lines = file.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Config(format!("{}: empty CSV", path.display())))??;
        let expected_header = match grid.kind() {
            GridKind::Axisym => "theta,value",
            GridKind::Full2d => "theta,phi,value",
        };
        if header.trim() != expected_header {
            return Err(Error::Config(format!(
                "{}: expected header `{expected_header}`, got `{header}`",
                path.display()
            )));
        }
        let mut values = Vec::with_capacity(grid.node_count());
        for (row, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split(',').collect();
            let parse = |s: &str| -> Result<f64> {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Config(format!("{}: row {}: {e}", path.display(), row + 2)))
            };
            if row >= grid.node_count() {
                return Err(Error::Config(format!(
                    "{}: more rows than grid nodes ({})",
                    path.display(),
                    grid.node_count()
                )));
            }
            let coord_cols = parts.len() - 1;
            let expect_cols = if grid.kind() == GridKind::Axisym { 1 } else { 2 };
            if coord_cols != expect_cols {
                return Err(Error::Config(format!(
                    "{}: row {}: expected {expect_cols}+1 columns",
                    path.display(),
                    row + 2
                )));
            }
            let theta = parse(parts[0])?;
            if (theta - grid.theta(row)).abs() > 1e-12 {
                return Err(Error::Config(format!(
                    "{}: row {}: theta {} does not match grid node {}",
                    path.display(),
                    row + 2,
                    theta,
                    grid.theta(row)
                )));
            }
            if grid.kind() == GridKind::Full2d {
                let phi = parse(parts[1])?;
                if (phi - grid.phi(row)).abs() > 1e-12 {
                    return Err(Error::Config(format!(
                        "{}: row {}: phi mismatch",
                        path.display(),
                        row + 2
                    )));
                }
            }
            values.push(parse(parts[coord_cols])?);
        }
        if values.len() != grid.node_count() {
            return Err(Error::Config(format!(
                "{}: {} rows for {} grid nodes",
                path.display(),
                values.len(),
                grid.node_count()
            )));
        }
        Ok(ScalarField { grid: grid.clone(), values })
    }
}

/// Per-node frame data for W_u^ε = ∇²u + (u+ε)g and the gradient ∇u.
#[derive(Clone, Debug)]
pub struct WField {
    pub grid: Arc<SphereGrid>,
    /// orthonormal-frame components of W_u^ε, one n×n symmetric matrix per node
    pub w: Vec<SymMatrix>,
    /// frame components of ∇u, n per node
    pub grad: Vec<f64>,
    pub eig_min: Vec<f64>,
    pub eig_max: Vec<f64>,
}

impl WField {
    pub fn grad_at(&self, node: usize) -> &[f64] {
        let n = self.grid.n();
        &self.grad[node * n..(node + 1) * n]
    }

    pub fn grad_norm_sq(&self, node: usize) -> f64 {
        self.grad_at(node).iter().map(|g| g * g).sum()
    }
}

/// Assembles W_u^ε and ∇u at every node with second-order central differences.
pub fn covariant_w(u: &ScalarField, eps: f64) -> WField {
    let grid = &u.grid;
    let n = grid.n();
    let count = grid.node_count();
    struct NodeW {
        w: SymMatrix,
        grad: Vec<f64>,
        lo: f64,
        hi: f64,
    }
    let mut nodes: Vec<NodeW> = Vec::with_capacity(count);
    nodes.resize_with(count, || NodeW { w: SymMatrix::zeros(1), grad: vec![], lo: 0.0, hi: 0.0 });
    par_map_into(&mut nodes, |idx| {
        let uc = u.values[idx];
        match grid.kind() {
            GridKind::Axisym => {
                let j = idx as isize;
                let h = grid.theta_step();
                let up = u.values[grid.axisym_ghost(j + 1)];
                let um = u.values[grid.axisym_ghost(j - 1)];
                // grouped so that derivative terms vanish exactly on constants
                let d2 = ((up - uc) + (um - uc)) / (h * h);
                let d1 = (up - um) / (2.0 * h);
                let ct = 1.0 / grid.theta(idx).tan();
                let lam_r = d2 + uc + eps;
                let lam_t = ct * d1 + uc + eps;
                let mut diag = vec![lam_t; n];
                diag[0] = lam_r;
                let w = SymMatrix::from_diag(&diag);
                let mut grad = vec![0.0; n];
                grad[0] = d1;
                NodeW { w, grad, lo: lam_r.min(lam_t), hi: lam_r.max(lam_t) }
            }
            GridKind::Full2d => {
                let i = (idx / grid.jp) as isize;
                let m = (idx % grid.jp) as isize;
                let (ht, hp) = (grid.ht, grid.hp);
                let t = grid.theta(idx);
                let (st, ct) = (t.sin(), 1.0 / t.tan());
                let v = |di: isize, dm: isize| u.values[grid.full2d_ghost(i + di, m + dm)];
                let dtt = ((v(1, 0) - uc) + (v(-1, 0) - uc)) / (ht * ht);
                let dpp = ((v(0, 1) - uc) + (v(0, -1) - uc)) / (hp * hp);
                let dtp = ((v(1, 1) - v(1, -1)) - (v(-1, 1) - v(-1, -1))) / (4.0 * ht * hp);
                let dt = (v(1, 0) - v(-1, 0)) / (2.0 * ht);
                let dp = (v(0, 1) - v(0, -1)) / (2.0 * hp);
                let wtt = dtt + uc + eps;
                let wtp = (dtp - ct * dp) / st;
                let wpp = dpp / (st * st) + ct * dt + uc + eps;
                let mut w = SymMatrix::zeros(2);
                w.set(0, 0, wtt);
                w.set(0, 1, wtp);
                w.set(1, 1, wpp);
                let grad = vec![dt, dp / st];
                let mid = 0.5 * (wtt + wpp);
                let rad = (0.25 * (wtt - wpp) * (wtt - wpp) + wtp * wtp).sqrt();
                NodeW { w, grad, lo: mid - rad, hi: mid + rad }
            }
        }
    });
    let mut w = Vec::with_capacity(count);
    let mut grad = Vec::with_capacity(count * n);
    let mut eig_min = Vec::with_capacity(count);
    let mut eig_max = Vec::with_capacity(count);
    for node in nodes {
        w.push(node.w);
        grad.extend_from_slice(&node.grad);
        eig_min.push(node.lo);
        eig_max.push(node.hi);
    }
    WField { grid: grid.clone(), w, grad, eig_min, eig_max }
}

/// Quadrature: Σ values·weights → ∫_{Sⁿ} field dμ at O(h²).
pub fn integrate(field: &ScalarField) -> f64 {
    field
        .values
        .iter()
        .enumerate()
        .map(|(i, &v)| v * field.grid.weight(i))
        .sum()
}

/// Even part under the antipodal map: out(x) = (f(x) + f(−x))/2.
pub fn symmetrize_even(field: &ScalarField) -> ScalarField {
    let grid = &field.grid;
    let values: Vec<f64> = (0..grid.node_count())
        .map(|i| 0.5 * (field.values[i] + field.values[grid.antipode(i)]))
        .collect();
    ScalarField { grid: grid.clone(), values }
}

/// Sup-norm of the odd part; zero iff the field is exactly even.
pub fn evenness_defect(field: &ScalarField) -> f64 {
    let grid = &field.grid;
    (0..grid.node_count())
        .map(|i| (field.values[i] - field.values[grid.antipode(i)]).abs())
        .fold(0.0, f64::max)
}

/// Resamples a field onto another grid of the same kind and sphere dimension
/// with quadratic (3-point Lagrange) interpolation per axis. Used by
/// Richardson error estimation across resolutions.
pub fn resample(field: &ScalarField, target: &Arc<SphereGrid>) -> Result<ScalarField> {
    let src = &field.grid;
    if src.kind() != target.kind() || src.n() != target.n() {
        return Err(Error::Config("resample: grids differ in kind or dimension".into()));
    }
    let interp1 = |vals: &dyn Fn(usize) -> f64, nodes: usize, h: f64, x: f64| -> f64 {
        // nodes at (j+1/2)h, j = 0..nodes-1; clamped 3-point stencil
        let jc = ((x / h - 0.5).round() as isize).clamp(1, nodes as isize - 2) as usize;
        let t0 = (jc as f64 - 0.5) * h;
        let s = (x - t0) / h - 1.0; // offset from the middle node, in units of h
        let (vm, v0, vp) = (vals(jc - 1), vals(jc), vals(jc + 1));
        0.5 * s * (s - 1.0) * vm + (1.0 - s * s) * v0 + 0.5 * s * (s + 1.0) * vp
    };
    match src.kind() {
        GridKind::Axisym => {
            let getter = |j: usize| field.values[j];
            let values: Vec<f64> = (0..target.node_count())
                .map(|i| interp1(&getter, src.jt, src.ht, target.theta(i)))
                .collect();
            Ok(ScalarField { grid: target.clone(), values })
        }
        GridKind::Full2d => {
            let values: Vec<f64> = (0..target.node_count())
                .map(|i| {
                    let tt = target.theta(i);
                    let tp = target.phi(i);
                    // interpolate in φ (periodic) on each source θ-row, then in θ
                    let row_val = |row: usize| -> f64 {
                        let jp = src.jp;
                        let mc = ((tp / src.hp - 0.5).round() as isize).rem_euclid(jp as isize) as usize;
                        let p0 = (mc as f64 + 0.5) * src.hp;
                        let mut s = (tp - p0) / src.hp;
                        if s > 0.5 {
                            s -= jp as f64;
                        }
                        let vm = field.values[row * jp + (mc + jp - 1) % jp];
                        let v0 = field.values[row * jp + mc];
                        let vp = field.values[row * jp + (mc + 1) % jp];
                        0.5 * s * (s - 1.0) * vm + (1.0 - s * s) * v0 + 0.5 * s * (s + 1.0) * vp
                    };
                    let getter = |j: usize| row_val(j);
                    interp1(&getter, src.jt, src.ht, tt)
                })
                .collect();
            Ok(ScalarField { grid: target.clone(), values })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn axisym(n: usize, j: usize) -> Arc<SphereGrid> {
        SphereGrid::build(n, GridKind::Axisym, &[j]).unwrap()
    }

    fn full2d(jt: usize, jp: usize) -> Arc<SphereGrid> {
        SphereGrid::build(2, GridKind::Full2d, &[jt, jp]).unwrap()
    }

    #[test]
    fn build_validation() {
        assert!(matches!(
            SphereGrid::build(3, GridKind::Full2d, &[64, 128]),
            Err(Error::UnsupportedGrid { .. })
        ));
        assert!(matches!(
            SphereGrid::build(2, GridKind::Full2d, &[64, 127]),
            Err(Error::InvalidResolution { res: 127 })
        ));
        assert!(matches!(
            SphereGrid::build(2, GridKind::Axisym, &[6]),
            Err(Error::InvalidResolution { res: 6 })
        ));
    }

    #[test]
    fn quadrature_mass() {
        let g3 = axisym(3, 256);
        assert!((g3.area() - 2.0 * PI * PI).abs() / (2.0 * PI * PI) < 1e-4);
        let g2 = full2d(64, 128);
        assert!((g2.area() - 4.0 * PI).abs() / (4.0 * PI) < 1e-4);
        let g2a = axisym(2, 128);
        assert!((g2a.area() - 4.0 * PI).abs() / (4.0 * PI) < 1e-4);
        assert!(g2.weights.iter().all(|&w| w > 0.0));
    }

    #[test]
    fn antipode_is_involution() {
        for grid in [axisym(3, 16), full2d(8, 12) as Arc<SphereGrid>] {
            for i in 0..grid.node_count() {
                let a = grid.antipode(i);
                assert_eq!(grid.antipode(a), i);
                assert_ne!(a, i);
                // ambient antipodality
                let x = grid.ambient(i);
                let y = grid.ambient(a);
                if grid.kind() == GridKind::Full2d {
                    for d in 0..3 {
                        assert!((x[d] + y[d]).abs() < 1e-12);
                    }
                } else {
                    assert!((x.last().unwrap() + y.last().unwrap()).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn integrate_examples() {
        let g2 = full2d(64, 128);
        let one = ScalarField::constant(&g2, 1.0);
        assert!((integrate(&one) - 4.0 * PI).abs() < 1e-4 * 4.0 * PI);

        let cos_t = ScalarField::from_fn(&g2, |t, _| t.cos());
        assert!(integrate(&cos_t).abs() < 1e-10);

        let cos2 = ScalarField::from_fn(&g2, |t, _| t.cos() * t.cos());
        assert!((integrate(&cos2) - 4.0 * PI / 3.0).abs() < 1e-4 * 4.0 * PI);
    }

    #[test]
    fn symmetrize_examples() {
        let g = axisym(3, 64);
        let even = ScalarField::from_fn(&g, |t, _| 1.0 + t.cos() * t.cos());
        let se = symmetrize_even(&even);
        for i in 0..g.node_count() {
            assert!((se.values[i] - even.values[i]).abs() < 1e-15);
        }
        let odd = ScalarField::from_fn(&g, |t, _| t.cos());
        let so = symmetrize_even(&odd);
        assert!(so.sup_norm() < 1e-15);
        let mixed = ScalarField::from_fn(&g, |t, _| 0.3 + t.cos() + t.cos() * t.cos());
        let s1 = symmetrize_even(&mixed);
        let s2 = symmetrize_even(&s1);
        assert_eq!(s1.values, s2.values); // idempotent, bitwise
        assert_eq!(evenness_defect(&s1), 0.0);
    }

    #[test]
    fn covariant_w_constant_exact() {
        for grid in [axisym(3, 32), full2d(16, 32) as Arc<SphereGrid>] {
            let u = ScalarField::constant(&grid, 2.5);
            let wf = covariant_w(&u, 0.0);
            for i in 0..grid.node_count() {
                for a in 0..grid.n() {
                    for b in 0..grid.n() {
                        let expect = if a == b { 2.5 } else { 0.0 };
                        assert_eq!(wf.w[i].get(a, b), expect, "node {i} entry ({a},{b})");
                    }
                }
                assert_eq!(wf.grad_norm_sq(i), 0.0);
            }
            // with ε: shifts the diagonal exactly
            let wf_eps = covariant_w(&u, 0.25);
            for i in 0..grid.node_count() {
                assert_eq!(wf_eps.w[i].get(0, 0), 2.75);
            }
        }
    }

    #[test]
    fn covariant_w_translated_ball() {
        // u = 1 − cosθ = 1 − x_{n+1}: both eigenvalues 1 up to O(h²)
        for (grid, tol) in [
            (axisym(3, 64), 7e-4),
            (axisym(3, 128), 1.8e-4),
            (full2d(32, 64) as Arc<SphereGrid>, 2.5e-3),
        ] {
            let u = ScalarField::from_fn(&grid, |t, _| 1.0 - t.cos());
            let wf = covariant_w(&u, 0.0);
            for i in 0..grid.node_count() {
                assert!(
                    (wf.eig_min[i] - 1.0).abs() < tol && (wf.eig_max[i] - 1.0).abs() < tol,
                    "node {i}: [{}, {}] (tol {tol})",
                    wf.eig_min[i],
                    wf.eig_max[i]
                );
            }
        }
    }

    #[test]
    fn covariant_w_affine_convergence_order() {
        // invariant: FD error on u = a + b·x_{n+1} shrinks ≥ 3.5× per doubling
        let err = |j: usize| -> f64 {
            let g = axisym(3, j);
            let u = ScalarField::from_fn(&g, |t, _| 1.3 + 0.4 * t.cos());
            let wf = covariant_w(&u, 0.0);
            (0..g.node_count())
                .map(|i| (wf.eig_min[i] - 1.3).abs().max((wf.eig_max[i] - 1.3).abs()))
                .fold(0.0, f64::max)
        };
        let (e1, e2) = (err(64), err(128));
        assert!(e1 / e2 >= 3.5, "ratio {} (errors {e1} {e2})", e1 / e2);
    }

    #[test]
    fn covariant_w_smooth_convergence_order() {
        let analytic = |t: f64| {
            let y = t.cos();
            // u = 1 + 0.1 y²: λ_r = 1.2 − 0.3y², λ_t = 1 − 0.1y²
            (1.2 - 0.3 * y * y, 1.0 - 0.1 * y * y)
        };
        let err = |grid: Arc<SphereGrid>| -> f64 {
            let u = ScalarField::from_fn(&grid, |t, _| 1.0 + 0.1 * t.cos() * t.cos());
            let wf = covariant_w(&u, 0.0);
            (0..grid.node_count())
                .map(|i| {
                    let (lr, lt) = analytic(grid.theta(i));
                    let lo = lr.min(lt);
                    let hi = lr.max(lt);
                    (wf.eig_min[i] - lo).abs().max((wf.eig_max[i] - hi).abs())
                })
                .fold(0.0, f64::max)
        };
        let r1 = err(axisym(3, 64)) / err(axisym(3, 128));
        assert!(r1 >= 3.5, "axisym ratio {r1}");
        let r2 = err(full2d(16, 32)) / err(full2d(32, 64));
        assert!(r2 >= 3.5, "full2d ratio {r2}");
    }

    #[test]
    fn covariant_w_degenerate_closed_form() {
        // u = (1−cosθ)^α, α = 10/9 on S³: eigenvalues match the factored form
        // λ_t = (1−y)^{α−1}(1+(α−1)y), λ_r = λ_t + α(α−1)(1−y)^{α−1}(1+y)
        // at fixed θ away from the degenerate pole, at O(h²).
        let alpha = 10.0 / 9.0;
        let lam = |y: f64| {
            let base = (1.0 - y).powf(alpha - 1.0);
            let lt = base * (1.0 + (alpha - 1.0) * y);
            let lr = lt + alpha * (alpha - 1.0) * base * (1.0 + y);
            (lr, lt)
        };
        let err = |j: usize| -> f64 {
            let g = axisym(3, j);
            let u = ScalarField::from_fn(&g, |t, _| (1.0 - t.cos()).powf(alpha));
            let wf = covariant_w(&u, 0.0);
            (0..g.node_count())
                .filter(|&i| g.theta(i) > 0.5) // fixed region of smoothness
                .map(|i| {
                    let (lr, lt) = lam(g.theta(i).cos());
                    (wf.w[i].get(0, 0) - lr).abs().max((wf.w[i].get(1, 1) - lt).abs())
                })
                .fold(0.0, f64::max)
        };
        let ratio = err(64) / err(128);
        assert!(ratio >= 3.5, "ratio {ratio}");
    }

    #[test]
    fn even_field_spectrum_commutes_with_antipode() {
        for grid in [axisym(3, 64), full2d(16, 32) as Arc<SphereGrid>] {
            let u = ScalarField::from_fn(&grid, |t, p| {
                1.0 + 0.1 * t.cos() * t.cos() + 0.02 * (2.0 * p).cos() * t.sin() * t.sin()
            });
            assert!(evenness_defect(&u) < 1e-15);
            let wf = covariant_w(&u, 0.0);
            for i in 0..grid.node_count() {
                let a = grid.antipode(i);
                assert!((wf.eig_min[i] - wf.eig_min[a]).abs() < 1e-12);
                assert!((wf.eig_max[i] - wf.eig_max[a]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn csv_round_trip_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        for grid in [axisym(3, 16), full2d(8, 12) as Arc<SphereGrid>] {
            let u = ScalarField::from_fn(&grid, |t, p| (t * 17.3).sin() + 0.001 * p);
            let path = dir.path().join(format!("f_{}.csv", grid.kind()));
            u.to_csv(&path).unwrap();
            let back = ScalarField::from_csv(&grid, &path).unwrap();
            assert_eq!(u.values, back.values);
        }
    }

    #[test]
    fn csv_rejects_wrong_grid() {
        let dir = tempfile::tempdir().unwrap();
        let g16 = axisym(3, 16);
        let g32 = axisym(3, 32);
        let u = ScalarField::constant(&g16, 1.0);
        let path = dir.path().join("f.csv");
        u.to_csv(&path).unwrap();
        assert!(ScalarField::from_csv(&g32, &path).is_err());
    }

    #[test]
    fn resample_reproduces_smooth_fields() {
        let coarse = axisym(3, 64);
        let fine = axisym(3, 128);
        let f_fine = ScalarField::from_fn(&fine, |t, _| 1.0 + 0.3 * (2.0 * t).cos());
        let back = resample(&f_fine, &coarse).unwrap();
        let exact = ScalarField::from_fn(&coarse, |t, _| 1.0 + 0.3 * (2.0 * t).cos());
        assert!(back.sub(&exact).sup_norm() < 5e-5);

        let c2 = full2d(16, 32);
        let f2 = full2d(32, 64);
        let f_fine2 = ScalarField::from_fn(&f2, |t, p| 1.0 + 0.2 * t.cos() * t.cos() + 0.05 * p.sin() * t.sin());
        let back2 = resample(&f_fine2, &c2).unwrap();
        let exact2 =
            ScalarField::from_fn(&c2, |t, p| 1.0 + 0.2 * t.cos() * t.cos() + 0.05 * p.sin() * t.sin());
        assert!(back2.sub(&exact2).sup_norm() < 1e-3);
    }
}
