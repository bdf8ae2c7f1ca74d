//! Banded LU factorization with partial pivoting.
//!
//! The discrete linearized operators assembled in this crate are banded:
//! tridiagonal for axisymmetric grids, bandwidth 2·Jφ−1 for the full 2-D grid
//! (θ-major node ordering; the longitude wrap of the mixed-derivative corners
//! sets the band). Storage and algorithm follow the LAPACK `dgbtrf`/`dgbtrs`
//! band layout: entry (i, j) lives at `ab[j*rows + (kl + ku + i − j)]`,
//! column-major so the elimination updates walk contiguous memory.

#[derive(Clone, Debug)]
pub struct BandedMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    /// column-major band storage, `rows = 2kl+ku+1` entries per column; the
    /// extra kl rows hold fill-in during factorization
    ab: Vec<f64>,
    rows: usize,
}

impl BandedMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let rows = 2 * kl + ku + 1;
        BandedMatrix { n, kl, ku, ab: vec![0.0; rows * n], rows }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bandwidths(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }

    #[inline]
    fn offset(&self) -> usize {
        self.kl + self.ku
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(
            j + self.kl >= i && i + self.ku >= j,
            "({i},{j}) outside band kl={} ku={}",
            self.kl,
            self.ku
        );
        self.ab[j * self.rows + (self.offset() + i - j)] += v;
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j + self.kl < i || i + self.ku < j {
            return 0.0;
        }
        self.ab[j * self.rows + (self.offset() + i - j)]
    }

    /// y = A·x (logical band only; valid before factorization).
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let off = self.offset();
        let mut y = vec![0.0; self.n];
        for j in 0..self.n {
            let xj = x[j];
            if xj == 0.0 {
                continue;
            }
            let ilo = j.saturating_sub(self.ku);
            let ihi = (j + self.kl).min(self.n - 1);
            let col = &self.ab[j * self.rows..];
            for i in ilo..=ihi {
                y[i] += col[off + i - j] * xj;
            }
        }
        y
    }

    /// Dense copy for small-system diagnostics and tests.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n * self.n];
        for i in 0..self.n {
            for j in i.saturating_sub(self.kl)..=(i + self.ku).min(self.n - 1) {
                d[i * self.n + j] = self.get(i, j);
            }
        }
        d
    }

    /// LU factorization with partial pivoting, in place. Fill-in widens the
    /// upper bandwidth from ku to kl+ku.
    pub fn factor(mut self) -> Result<BandedLu, SingularMatrix> {
        let n = self.n;
        let kl = self.kl;
        let rows = self.rows;
        let off = self.offset();
        let ku_w = kl + self.ku; // upper bandwidth after fill-in
        let mut pivots = vec![0usize; n];
        for col in 0..n {
            let colbase = col * rows;
            // pivot search within rows col..=col+kl (storage rows off..off+kl)
            let rmax = (col + kl).min(n - 1) - col;
            let mut piv = 0;
            let mut best = self.ab[colbase + off].abs();
            for d in 1..=rmax {
                let v = self.ab[colbase + off + d].abs();
                if v > best {
                    best = v;
                    piv = d;
                }
            }
            if best == 0.0 {
                return Err(SingularMatrix { col });
            }
            pivots[col] = col + piv;
            let jhi = (col + ku_w).min(n - 1);
            if piv != 0 {
                // swap logical rows col and col+piv across columns col..=jhi
                for j in col..=jhi {
                    let base = j * rows + off + col - j;
                    self.ab.swap(base, base + piv);
                }
            }
            let d_inv = 1.0 / self.ab[colbase + off];
            let rhi = (col + kl).min(n - 1) - col;
            for d in 1..=rhi {
                self.ab[colbase + off + d] *= d_inv;
            }
            // right-looking rank-1 update, contiguous in each column slice
            for j in (col + 1)..=jhi {
                let ujc = self.ab[j * rows + off + col - j];
                if ujc == 0.0 {
                    continue;
                }
                let dst_base = j * rows + off + col - j;
                for d in 1..=rhi {
                    let m = self.ab[colbase + off + d];
                    self.ab[dst_base + d] -= m * ujc;
                }
            }
        }
        Ok(BandedLu { n, kl, ku_w, rows, ab: self.ab, pivots })
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SingularMatrix {
    pub col: usize,
}

impl std::fmt::Display for SingularMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "singular banded matrix at column {}", self.col)
    }
}

pub struct BandedLu {
    n: usize,
    kl: usize,
    ku_w: usize,
    rows: usize,
    ab: Vec<f64>,
    pivots: Vec<usize>,
}

impl BandedLu {
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        assert_eq!(rhs.len(), self.n);
        let n = self.n;
        let off = self.rows - self.kl - 1; // storage row of the diagonal
        let mut x = rhs.to_vec();
        // forward: apply pivots and the multipliers stored below the diagonal
        for col in 0..n {
            let piv = self.pivots[col];
            if piv != col {
                x.swap(col, piv);
            }
            let xc = x[col];
            if xc != 0.0 {
                let rhi = (col + self.kl).min(n - 1) - col;
                let base = col * self.rows + off;
                for d in 1..=rhi {
                    x[col + d] -= self.ab[base + d] * xc;
                }
            }
        }
        // back substitution with U (column-oriented)
        for col in (0..n).rev() {
            let xc = x[col] / self.ab[col * self.rows + off];
            x[col] = xc;
            if xc != 0.0 {
                let ilo = col.saturating_sub(self.ku_w);
                for i in ilo..col {
                    x[i] -= self.ab[col * self.rows + off + i - col] * xc;
                }
            }
        }
        x
    }
}
