//! Dense symmetric linear algebra for small systems.
//!
//! Coefficient counts in this domain stay in the tens, so everything is a
//! plain row-major `Vec<f64>` with direct O(n^3) factorizations: Cholesky for
//! Newton steps and covariance, a diagonally pivoted variant for rank
//! detection, and cyclic Jacobi for eigenvalues.

use crate::num;
use alloc::vec;
use alloc::vec::Vec;

/// Square row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Matrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_rows(n: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), n * n);
        Matrix { n, data }
    }

    pub fn order(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    #[inline]
    pub fn add_to(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] += v;
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Elementwise sum, consuming the right-hand side.
    pub fn add_assign(&mut self, other: &Matrix) {
        debug_assert_eq!(self.n, other.n);
        for (a, b) in self.data.iter_mut().zip(other.data.iter()) {
            *a += b;
        }
    }

    pub fn scale(&mut self, s: f64) {
        for a in self.data.iter_mut() {
            *a *= s;
        }
    }

    /// Largest absolute asymmetry |a_ij - a_ji|.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    /// Cholesky factor L with A = L L^T. Fails with the pivot index if a
    /// pivot is not positive.
    pub fn cholesky(&self) -> Result<Cholesky, usize> {
        let n = self.n;
        let mut l = vec![0.0; n * n];
        for j in 0..n {
            let mut d = self.get(j, j);
            for k in 0..j {
                d -= l[j * n + k] * l[j * n + k];
            }
            if !(d > 0.0) || !d.is_finite() {
                return Err(j);
            }
            let dj = num::sqrt(d);
            l[j * n + j] = dj;
            for i in (j + 1)..n {
                let mut s = self.get(i, j);
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = s / dj;
            }
        }
        Ok(Cholesky { n, l })
    }

    /// Diagonally pivoted Cholesky for rank detection on a positive
    /// semidefinite matrix. Returns the numerical rank and the permutation:
    /// `perm[rank..]` are the column indices that could not be pivoted above
    /// the tolerance, i.e. the ones dependent on the columns before them.
    pub fn pivoted_rank(&self, rel_tol: f64) -> (usize, Vec<usize>) {
        let n = self.n;
        let mut a = self.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let max_diag = (0..n).fold(0.0f64, |m, i| m.max(a[i * n + i]));
        let tol = rel_tol * max_diag.max(1e-300);
        for step in 0..n {
            // Select the largest remaining diagonal element.
            let (mut best, mut best_val) = (step, a[perm[step] * n + perm[step]]);
            for t in (step + 1)..n {
                let v = a[perm[t] * n + perm[t]];
                if v > best_val {
                    best = t;
                    best_val = v;
                }
            }
            if best_val <= tol {
                return (step, perm);
            }
            perm.swap(step, best);
            let p = perm[step];
            let d = a[p * n + p];
            // Schur-complement update of the remaining diagonal block.
            for t in (step + 1)..n {
                let q = perm[t];
                let f = a[q * n + p] / d;
                for u in (step + 1)..n {
                    let r = perm[u];
                    let upd = f * a[r * n + p];
                    a[q * n + r] -= upd;
                }
            }
        }
        (n, perm)
    }

    /// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, sorted
    /// ascending.
    pub fn symmetric_eigenvalues(&self) -> Vec<f64> {
        let n = self.n;
        let mut a = self.data.clone();
        if n == 0 {
            return Vec::new();
        }
        for _sweep in 0..100 {
            let mut off = 0.0;
            for i in 0..n {
                for j in (i + 1)..n {
                    off += a[i * n + j] * a[i * n + j];
                }
            }
            if off.abs() < 1e-26 {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a[p * n + q];
                    if apq.abs() < 1e-300 {
                        continue;
                    }
                    let app = a[p * n + p];
                    let aqq = a[q * n + q];
                    let theta = (aqq - app) / (2.0 * apq);
                    let t = if theta >= 0.0 {
                        1.0 / (theta + num::sqrt(1.0 + theta * theta))
                    } else {
                        1.0 / (theta - num::sqrt(1.0 + theta * theta))
                    };
                    let c = 1.0 / num::sqrt(1.0 + t * t);
                    let s = t * c;
                    for k in 0..n {
                        let akp = a[k * n + p];
                        let akq = a[k * n + q];
                        a[k * n + p] = c * akp - s * akq;
                        a[k * n + q] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[p * n + k];
                        let aqk = a[q * n + k];
                        a[p * n + k] = c * apk - s * aqk;
                        a[q * n + k] = s * apk + c * aqk;
                    }
                }
            }
        }
        let mut eig: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
        eig.sort_by(|x, y| x.partial_cmp(y).unwrap());
        eig
    }
}

/// Lower-triangular Cholesky factor.
pub struct Cholesky {
    n: usize,
    l: Vec<f64>,
}

impl Cholesky {
    /// Solve A x = b.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        debug_assert_eq!(b.len(), n);
        let mut y = b.to_vec();
        // Forward substitution L y = b.
        for i in 0..n {
            for k in 0..i {
                y[i] -= self.l[i * n + k] * y[k];
            }
            y[i] /= self.l[i * n + i];
        }
        // Back substitution L^T x = y.
        for i in (0..n).rev() {
            for k in (i + 1)..n {
                y[i] -= self.l[k * n + i] * y[k];
            }
            y[i] /= self.l[i * n + i];
        }
        y
    }

    /// Full inverse A^{-1} = L^{-T} L^{-1}.
    pub fn inverse(&self) -> Matrix {
        let n = self.n;
        // Invert L in place (lower triangular).
        let mut linv = vec![0.0; n * n];
        for i in 0..n {
            linv[i * n + i] = 1.0 / self.l[i * n + i];
            for j in 0..i {
                let mut s = 0.0;
                for k in j..i {
                    s += self.l[i * n + k] * linv[k * n + j];
                }
                linv[i * n + j] = -s / self.l[i * n + i];
            }
        }
        // A^{-1} = L^{-T} L^{-1}.
        let mut inv = Matrix::zeros(n);
        for i in 0..n {
            for j in 0..=i {
                let mut s = 0.0;
                for k in i..n {
                    s += linv[k * n + i] * linv[k * n + j];
                }
                inv.set(i, j, s);
                inv.set(j, i, s);
            }
        }
        inv
    }
}
