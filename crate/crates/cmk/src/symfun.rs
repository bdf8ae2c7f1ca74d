//! Elementary symmetric functions σ_k on symmetric matrices: values, first
//! and second derivatives, complete polarization, and Garding-cone (Γ_k)
//! membership.
//!
//! σ_k is evaluated through the characteristic-polynomial coefficients via
//! Newton's identities (eigen-free, exact polynomial recursion); the
//! eigenvalue path exists only as a diagnostic. First derivatives come from
//! the Newton transformation T_{k−1}(A) = Σ_{j≤k−1} (−1)^j σ_{k−1−j}(A) A^j,
//! for which ∂σ_k/∂A_{ij} = (T_{k−1})_{ij}. Second derivatives use the
//! polarized form: ∂²σ_k/∂A_{ij}∂A_{lm} = k(k−1)·σ_k(E_{ij}, E_{lm}, A, …, A).

use crate::error::{Error, Result};

/// Dense symmetric n×n matrix, row-major full storage.
///
/// Entries are kept exactly symmetric by construction; `set` writes both
/// (i,j) and (j,i).
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix {
    n: usize,
    a: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        assert!(n >= 1, "matrix dimension must be ≥ 1");
        SymMatrix { n, a: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.a[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_diag(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, &v) in d.iter().enumerate() {
            m.a[i * d.len() + i] = v;
        }
        m
    }

    /// Builds from a row-major full array, symmetrizing (A + Aᵀ)/2.
    pub fn from_rows(n: usize, rows: &[f64]) -> Self {
        assert_eq!(rows.len(), n * n);
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.a[i * n + j] = 0.5 * (rows[i * n + j] + rows[j * n + i]);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.a[i * self.n + j] = v;
        self.a[j * self.n + i] = v;
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.a[i * self.n + i]).sum()
    }

    pub fn scaled(&self, s: f64) -> Self {
        SymMatrix { n: self.n, a: self.a.iter().map(|x| x * s).collect() }
    }

    pub fn add(&self, other: &SymMatrix) -> Self {
        assert_eq!(self.n, other.n);
        SymMatrix {
            n: self.n,
            a: self.a.iter().zip(&other.a).map(|(x, y)| x + y).collect(),
        }
    }

    pub fn add_diag(&self, s: f64) -> Self {
        let mut m = self.clone();
        for i in 0..self.n {
            m.a[i * self.n + i] += s;
        }
        m
    }

    fn matmul(&self, other: &SymMatrix) -> Vec<f64> {
        let n = self.n;
        let mut c = vec![0.0; n * n];
        for i in 0..n {
            for l in 0..n {
                let aik = self.a[i * n + l];
                if aik == 0.0 {
                    continue;
                }
                for j in 0..n {
                    c[i * n + j] += aik * other.a[l * n + j];
                }
            }
        }
        c
    }
}

/// Γ_k membership report: the σ_1..σ_k values and the strict-positivity flag.
#[derive(Clone, Debug)]
pub struct ConeReport {
    pub k: usize,
    pub sigmas: Vec<f64>,
    pub in_cone: bool,
}

/// σ_0..σ_m of a general square matrix given as row-major entries, via
/// Newton's identities on power traces. Exact polynomial recursion; no
/// eigenvalue decomposition.
fn sigma_all_general(n: usize, a: &[f64], m: usize) -> Vec<f64> {
    debug_assert!(m <= n);
    // power traces p_1..p_m
    let mut traces = Vec::with_capacity(m);
    let mut pw = a.to_vec();
    for step in 0..m {
        if step > 0 {
            let mut next = vec![0.0; n * n];
            for i in 0..n {
                for l in 0..n {
                    let x = pw[i * n + l];
                    if x == 0.0 {
                        continue;
                    }
                    for j in 0..n {
                        next[i * n + j] += x * a[l * n + j];
                    }
                }
            }
            pw = next;
        }
        traces.push((0..n).map(|i| pw[i * n + i]).sum::<f64>());
    }
    // e_k = (1/k) Σ_{i=1..k} (−1)^{i−1} e_{k−i} p_i
    let mut e = vec![0.0; m + 1];
    e[0] = 1.0;
    for k in 1..=m {
        let mut acc = 0.0;
        let mut sign = 1.0;
        for i in 1..=k {
            acc += sign * e[k - i] * traces[i - 1];
            sign = -sign;
        }
        e[k] = acc / k as f64;
    }
    e
}

/// σ_0(A)..σ_m(A).
pub fn sigma_all(a: &SymMatrix, m: usize) -> Result<Vec<f64>> {
    if m > a.n {
        return Err(Error::InvalidOrder { k: m, n: a.n });
    }
    Ok(sigma_all_general(a.n, &a.a, m))
}

/// k-th elementary symmetric function of the eigenvalues of `a`; σ_0 := 1.
pub fn sigma_k_eval(a: &SymMatrix, k: usize) -> Result<f64> {
    if k > a.n {
        return Err(Error::InvalidOrder { k, n: a.n });
    }
    Ok(sigma_all_general(a.n, &a.a, k)[k])
}

/// σ_k of an explicit eigenvalue list (diagonal fast path), stable recurrence.
pub fn sigma_k_of_eigs(eigs: &[f64], k: usize) -> f64 {
    if k > eigs.len() {
        return 0.0;
    }
    let mut e = vec![0.0; k + 1];
    e[0] = 1.0;
    for &lam in eigs {
        for j in (1..=k).rev() {
            e[j] += lam * e[j - 1];
        }
    }
    e[k]
}

/// Newton transformation T_m(A) = σ_m I − σ_{m−1} A + … + (−1)^m A^m.
pub fn newton_transform(a: &SymMatrix, m: usize) -> Result<SymMatrix> {
    if m > a.n {
        return Err(Error::InvalidOrder { k: m, n: a.n });
    }
    let n = a.n;
    let sig = sigma_all_general(n, &a.a, m);
    // Horner-style: T_m = σ_m I − A (σ_{m−1} I − A (… ))
    let mut t = SymMatrix::identity(n).scaled(sig[m]);
    if m >= 1 {
        let mut acc = SymMatrix::identity(n); // A^j accumulator
        let mut sign = -1.0;
        for j in 1..=m {
            acc = SymMatrix { n, a: acc.matmul(a) };
            let c = sign * sig[m - j];
            for idx in 0..n * n {
                t.a[idx] += c * acc.a[idx];
            }
            sign = -sign;
        }
    }
    Ok(t)
}

/// Rank-4 array of second derivatives ∂²σ_k/∂A_{ij}∂A_{lm}.
#[derive(Clone, Debug)]
pub struct SigmaHessian {
    n: usize,
    v: Vec<f64>,
}

impl SigmaHessian {
    #[inline]
    pub fn get(&self, i: usize, j: usize, l: usize, m: usize) -> f64 {
        let n = self.n;
        self.v[((i * n + j) * n + l) * n + m]
    }

    /// Contraction Σ_{ij,lm} H[i,j,l,m] B_{ij} C_{lm}.
    pub fn bilinear(&self, b: &SymMatrix, c: &SymMatrix) -> f64 {
        let n = self.n;
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                let bij = b.get(i, j);
                if bij == 0.0 {
                    continue;
                }
                for l in 0..n {
                    for m in 0..n {
                        acc += self.get(i, j, l, m) * bij * c.get(l, m);
                    }
                }
            }
        }
        acc
    }
}

/// Gradient F^{ij} = ∂σ_k/∂A_{ij} (the Newton transformation T_{k−1}) and the
/// full second-derivative array σ_k^{ij,lm}, both treating entries of A as
/// independent variables.
pub fn sigma_k_derivatives(a: &SymMatrix, k: usize) -> Result<(SymMatrix, SigmaHessian)> {
    if k < 1 || k > a.n {
        return Err(Error::InvalidOrder { k, n: a.n });
    }
    let n = a.n;
    let grad = newton_transform(a, k - 1)?;

    let mut hess = SigmaHessian { n, v: vec![0.0; n * n * n * n] };
    if k >= 2 {
        // ∂²σ_k/∂A_{ij}∂A_{lm} = k(k−1)·Φ(E_ij, E_lm, A, …, A) where Φ is the
        // complete polarization. Evaluated by the subset expansion below.
        let kf = (k * (k - 1)) as f64;
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    for m in 0..n {
                        // exploit symmetry of the polarized form in (ij)↔(lm)
                        if (l * n + m) < (i * n + j) {
                            let val = hess.get(l, m, i, j);
                            hess.v[((i * n + j) * n + l) * n + m] = val;
                            continue;
                        }
                        let val = kf * polarized_two_directions(a, k, (i, j), (l, m));
                        hess.v[((i * n + j) * n + l) * n + m] = val;
                    }
                }
            }
        }
    }
    Ok((grad, hess))
}

/// Φ(E_pq, E_rs, A^{k−2}) where Φ is the complete polarization of σ_k and
/// E_pq is the single-entry matrix. σ_k(A + s·E_pq + t·E_rs) is a bivariate
/// polynomial of degree ≤ k in each variable, and its s¹t¹ coefficient equals
/// k(k−1)·Φ(E_pq, E_rs, A^{k−2}); the coefficient is extracted exactly by
/// Lagrange interpolation on the integer nodes 0..k.
fn polarized_two_directions(a: &SymMatrix, k: usize, pq: (usize, usize), rs: (usize, usize)) -> f64 {
    let n = a.n;
    let pts = k + 1;
    let mut vals = vec![0.0; pts * pts];
    let mut work = a.a.clone();
    for (si, s) in (0..pts).enumerate() {
        for (ti, t) in (0..pts).enumerate() {
            work.copy_from_slice(&a.a);
            work[pq.0 * n + pq.1] += s as f64;
            work[rs.0 * n + rs.1] += t as f64;
            vals[si * pts + ti] = sigma_all_general(n, &work, k)[k];
        }
    }
    // exact coefficient of s^1 t^1 by二 tensorized finite-difference /
    // divided-difference extraction on integer nodes 0..k:
    // c_{11} = Σ_{si,ti} w_{si} w_{ti} vals[si][ti], where w are the weights
    // reproducing the first-derivative-at-structure coefficient of the
    // interpolating polynomial. For coefficient extraction of x^1 from values
    // on 0..k we use the inverse Vandermonde row 1.
    let w = vandermonde_coeff_row(pts, 1);
    let mut acc = 0.0;
    for si in 0..pts {
        for ti in 0..pts {
            acc += w[si] * w[ti] * vals[si * pts + ti];
        }
    }
    // acc = coefficient of s t = k(k−1)·Φ(E_pq, E_rs, A^{k−2}); caller wants Φ·k(k−1)
    // so return Φ only.
    acc / (k * (k - 1)) as f64
}

/// Row `r` of the inverse Vandermonde on nodes {0,1,…,m−1}: weights w with
/// Σ_i w_i·p(i) = coefficient of x^r of any polynomial p of degree < m.
fn vandermonde_coeff_row(m: usize, r: usize) -> Vec<f64> {
    // Solve Vᵀ w = e_r where V_{ij} = i^j, via Lagrange basis: the coefficient
    // of x^r in the Lagrange polynomial L_i(x) gives w_i.
    let mut w = vec![0.0; m];
    for i in 0..m {
        // L_i(x) = Π_{j≠i} (x − j)/(i − j); expand numerator polynomial
        let mut num = vec![0.0; m];
        num[0] = 1.0;
        let mut deg = 0;
        let mut denom = 1.0;
        for j in 0..m {
            if j == i {
                continue;
            }
            // multiply num by (x − j)
            deg += 1;
            for d in (1..=deg).rev() {
                num[d] = num[d - 1] - j as f64 * num[d];
            }
            num[0] *= -(j as f64);
            denom *= (i as f64) - (j as f64);
        }
        w[i] = num[r] / denom;
    }
    w
}

/// Complete polarization σ_k(A_1, …, A_k), normalized so that
/// σ_k(A, …, A) = σ_k(A). Evaluated by the multilinear subset expansion
///   Φ = (1/k!) Σ_{∅≠S⊆[k]} (−1)^{k−|S|} σ_k(Σ_{i∈S} A_i),
/// which costs 2^k−1 plain σ_k evaluations.
pub fn sigma_polarized(mats: &[SymMatrix], k: usize) -> Result<f64> {
    if mats.len() != k || k == 0 {
        return Err(Error::InvalidOrder { k, n: mats.first().map_or(0, |m| m.n) });
    }
    let n = mats[0].n;
    for m in mats {
        if m.n != n {
            return Err(Error::DimensionMismatch { expected: n, got: m.n });
        }
    }
    if k > n {
        return Err(Error::InvalidOrder { k, n });
    }
    let mut acc = 0.0;
    let mut sum = vec![0.0; n * n];
    for mask in 1u32..(1 << k) {
        sum.iter_mut().for_each(|x| *x = 0.0);
        let mut card = 0;
        for (i, m) in mats.iter().enumerate() {
            if mask & (1 << i) != 0 {
                card += 1;
                for idx in 0..n * n {
                    sum[idx] += m.a[idx];
                }
            }
        }
        let sgn = if (k - card) % 2 == 0 { 1.0 } else { -1.0 };
        acc += sgn * sigma_all_general(n, &sum, k)[k];
    }
    let mut kfact = 1.0;
    for i in 2..=k {
        kfact *= i as f64;
    }
    Ok(acc / kfact)
}

/// Reference evaluation of the complete polarization through the generalized
/// Kronecker delta,
///   σ_k(A_1,…,A_k) = (1/k!) Σ δ^{i_1…i_k}_{j_1…j_k} (A_1)_{i_1 j_1} ⋯ (A_k)_{i_k j_k}.
/// O(n^{2k}); kept for spot checks against [`sigma_polarized`].
pub fn sigma_polarized_delta(mats: &[SymMatrix]) -> Result<f64> {
    let k = mats.len();
    if k == 0 || k > 4 {
        return Err(Error::InvalidOrder { k, n: mats.first().map_or(0, |m| m.n) });
    }
    let n = mats[0].n;
    for m in mats {
        if m.n != n {
            return Err(Error::DimensionMismatch { expected: n, got: m.n });
        }
    }
    if k > n {
        return Err(Error::InvalidOrder { k, n });
    }
    let decode = |mut code: usize| -> Vec<usize> {
        let mut t = vec![0usize; k];
        for slot in t.iter_mut().rev() {
            *slot = code % n;
            code /= n;
        }
        t
    };
    let distinct = |t: &[usize]| -> bool {
        let mut seen = 0u32;
        t.iter().all(|&x| {
            let fresh = seen & (1 << x) == 0;
            seen |= 1 << x;
            fresh
        })
    };
    let total = n.pow(k as u32);
    let mut acc = 0.0;
    for ci in 0..total {
        let idx_i = decode(ci);
        if !distinct(&idx_i) {
            continue;
        }
        for cj in 0..total {
            let idx_j = decode(cj);
            if !distinct(&idx_j) {
                continue;
            }
            let d = generalized_delta(&idx_i, &idx_j);
            if d != 0.0 {
                let mut prod = d;
                for (t, m) in mats.iter().enumerate() {
                    prod *= m.get(idx_i[t], idx_j[t]);
                }
                acc += prod;
            }
        }
    }
    let mut kfact = 1.0;
    for i in 2..=k {
        kfact *= i as f64;
    }
    Ok(acc / kfact)
}

/// δ^{i_1…i_k}_{j_1…j_k} = det [δ_{i_a j_b}]_{a,b} (permutation expansion, k ≤ 4).
fn generalized_delta(is: &[usize], js: &[usize]) -> f64 {
    let k = is.len();
    let mut m = [[0.0f64; 4]; 4];
    for a in 0..k {
        for b in 0..k {
            m[a][b] = if is[a] == js[b] { 1.0 } else { 0.0 };
        }
    }
    match k {
        1 => m[0][0],
        2 => m[0][0] * m[1][1] - m[0][1] * m[1][0],
        3 => {
            m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
        }
        4 => {
            let minor = |r: usize, c: usize| -> f64 {
                let rows: Vec<usize> = (0..4).filter(|&x| x != r).collect();
                let cols: Vec<usize> = (0..4).filter(|&x| x != c).collect();
                m[rows[0]][cols[0]] * (m[rows[1]][cols[1]] * m[rows[2]][cols[2]] - m[rows[1]][cols[2]] * m[rows[2]][cols[1]])
                    - m[rows[0]][cols[1]] * (m[rows[1]][cols[0]] * m[rows[2]][cols[2]] - m[rows[1]][cols[2]] * m[rows[2]][cols[0]])
                    + m[rows[0]][cols[2]] * (m[rows[1]][cols[0]] * m[rows[2]][cols[1]] - m[rows[1]][cols[1]] * m[rows[2]][cols[0]])
            };
            (0..4).map(|c| if c % 2 == 0 { m[0][c] * minor(0, c) } else { -m[0][c] * minor(0, c) }).sum()
        }
        _ => panic!("generalized delta implemented for k ≤ 4"),
    }
}

/// Γ_k membership with strict inequalities and zero tolerance; callers that
/// want slack pass a pre-shifted matrix.
pub fn gamma_k_membership(a: &SymMatrix, k: usize) -> Result<ConeReport> {
    if k < 1 || k > a.n {
        return Err(Error::InvalidOrder { k, n: a.n });
    }
    let sig = sigma_all_general(a.n, &a.a, k);
    let sigmas: Vec<f64> = sig[1..=k].to_vec();
    let in_cone = sigmas.iter().all(|&s| s > 0.0);
    Ok(ConeReport { k, sigmas, in_cone })
}

/// Γ_k test for an eigenvalue list (diagonal fast path used in grid loops).
pub fn gamma_k_of_eigs(eigs: &[f64], k: usize) -> bool {
    let mut e = vec![0.0; k + 1];
    e[0] = 1.0;
    for &lam in eigs {
        for j in (1..=k.min(eigs.len())).rev() {
            e[j] += lam * e[j - 1];
        }
    }
    e[1..=k].iter().all(|&s| s > 0.0)
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
/// Diagnostic path only; the σ_k pipeline never calls this.
pub fn eigenvalues_sym(a: &SymMatrix) -> Vec<f64> {
    let n = a.n;
    let mut m = a.a.clone();
    for _sweep in 0..64 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += m[i * n + j] * m[i * n + j];
            }
        }
        if off.sqrt() < 1e-14 * (1.0 + m.iter().map(|x| x.abs()).fold(0.0, f64::max)) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let theta = 0.5 * (aqq - app) / apq;
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for i in 0..n {
                    let aip = m[i * n + p];
                    let aiq = m[i * n + q];
                    m[i * n + p] = c * aip - s * aiq;
                    m[i * n + q] = s * aip + c * aiq;
                }
                for j in 0..n {
                    let apj = m[p * n + j];
                    let aqj = m[q * n + j];
                    m[p * n + j] = c * apj - s * aqj;
                    m[q * n + j] = s * apj + c * aqj;
                }
            }
        }
    }
    let mut eigs: Vec<f64> = (0..n).map(|i| m[i * n + i]).collect();
    eigs.sort_by(|x, y| x.partial_cmp(y).unwrap());
    eigs
}
