//! Small dense linear algebra over generic scalars.
//!
//! Everything here targets the crate's working regime: square matrices of
//! side 2..8. LU with partial pivoting works for any [`Real`] scalar (pivots
//! are chosen on the point values, so the factorization is differentiable
//! along a fixed pivot sequence); the symmetric eigensolver is `f64`-only
//! and is used for rank decisions, never inside jet arithmetic.

use crate::real::Real;
use alloc::vec;
use alloc::vec::Vec;

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat<S = f64> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Real> Mat<S> {
    /// Zero matrix.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![S::zero(); rows * cols],
        }
    }

    /// Identity matrix.
    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = S::one();
        }
        m
    }

    /// Build from a function of the index pair.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Mat { rows, cols, data }
    }

    /// Row count.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Column count.
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, v: &[S]) -> Vec<S> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut acc = S::zero();
                for j in 0..self.cols {
                    acc = acc + self[(i, j)].clone() * v[j].clone();
                }
                acc
            })
            .collect()
    }

    /// Matrix product.
    pub fn mul_mat(&self, other: &Mat<S>) -> Mat<S> {
        assert_eq!(self.cols, other.rows);
        Mat::from_fn(self.rows, other.cols, |i, j| {
            let mut acc = S::zero();
            for k in 0..self.cols {
                acc = acc + self[(i, k)].clone() * other[(k, j)].clone();
            }
            acc
        })
    }

    /// Transpose.
    pub fn transpose(&self) -> Mat<S> {
        Mat::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    /// Point values of all entries.
    pub fn values(&self) -> Mat<f64> {
        Mat::from_fn(self.rows, self.cols, |i, j| self[(i, j)].value())
    }

    /// Frobenius norm of the point values.
    pub fn norm(&self) -> f64 {
        let mut acc = 0.0;
        for e in &self.data {
            let v = e.value();
            acc += v * v;
        }
        crate::real::fp::sqrt(acc)
    }

    /// LU factorization with partial pivoting; `None` when a pivot vanishes.
    pub fn lu(&self) -> Option<Lu<S>> {
        assert_eq!(self.rows, self.cols, "LU needs a square matrix");
        let n = self.rows;
        let mut a = self.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        for k in 0..n {
            let mut p = k;
            let mut best = a[(k, k)].value().abs();
            for i in k + 1..n {
                let cand = a[(i, k)].value().abs();
                if cand > best {
                    best = cand;
                    p = i;
                }
            }
            if best == 0.0 {
                return None;
            }
            if p != k {
                for j in 0..n {
                    a.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                sign = -sign;
            }
            for i in k + 1..n {
                let factor = a[(i, k)].clone() / a[(k, k)].clone();
                a[(i, k)] = factor.clone();
                for j in k + 1..n {
                    let upd = a[(i, j)].clone() - factor.clone() * a[(k, j)].clone();
                    a[(i, j)] = upd;
                }
            }
        }
        Some(Lu { lu: a, perm, sign })
    }

    /// Determinant (zero when the LU pivot chain collapses).
    pub fn det(&self) -> S {
        match self.lu() {
            None => S::zero(),
            Some(f) => f.det(),
        }
    }

    /// Inverse via LU; `None` when singular.
    pub fn inverse(&self) -> Option<Mat<S>> {
        let n = self.rows;
        let f = self.lu()?;
        let mut inv = Mat::zeros(n, n);
        for j in 0..n {
            let mut e = vec![S::zero(); n];
            e[j] = S::one();
            let col = f.solve(&e);
            for i in 0..n {
                inv[(i, j)] = col[i].clone();
            }
        }
        Some(inv)
    }
}

impl<S> core::ops::Index<(usize, usize)> for Mat<S> {
    type Output = S;
    fn index(&self, (i, j): (usize, usize)) -> &S {
        &self.data[i * self.cols + j]
    }
}

impl<S> core::ops::IndexMut<(usize, usize)> for Mat<S> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut S {
        &mut self.data[i * self.cols + j]
    }
}

/// LU factors of a square matrix.
pub struct Lu<S> {
    lu: Mat<S>,
    perm: Vec<usize>,
    sign: f64,
}

impl<S: Real> Lu<S> {
    /// Determinant from the pivot product.
    pub fn det(&self) -> S {
        let n = self.lu.rows;
        let mut d = S::from_f64(self.sign);
        for k in 0..n {
            d = d * self.lu[(k, k)].clone();
        }
        d
    }

    /// Solve `A x = b`.
    pub fn solve(&self, b: &[S]) -> Vec<S> {
        let n = self.lu.rows;
        assert_eq!(b.len(), n);
        let mut y: Vec<S> = self.perm.iter().map(|&p| b[p].clone()).collect();
        for i in 1..n {
            for j in 0..i {
                let upd = y[i].clone() - self.lu[(i, j)].clone() * y[j].clone();
                y[i] = upd;
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let upd = y[i].clone() - self.lu[(i, j)].clone() * y[j].clone();
                y[i] = upd;
            }
            y[i] = y[i].clone() / self.lu[(i, i)].clone();
        }
        y
    }
}

/// Eigendecomposition of a symmetric `f64` matrix by cyclic Jacobi sweeps.
///
/// Returns `(eigenvalues, eigenvectors)` with eigenvectors as columns, so
/// `A = V diag(w) V^T`. Converges to machine precision for the small
/// matrices used here.
pub fn sym_eigen(a: &Mat<f64>) -> (Vec<f64>, Mat<f64>) {
    assert_eq!(a.rows, a.cols);
    let n = a.rows;
    let mut m = a.clone();
    let mut v = Mat::<f64>::identity(n);
    let scale: f64 = m.norm().max(f64::MIN_POSITIVE);
    let mut prev_off = f64::INFINITY;
    for _sweep in 0..60 {
        let mut off = 0.0;
        for i in 0..n {
            for j in 0..i {
                off += m[(i, j)] * m[(i, j)];
            }
        }
        let off = crate::real::fp::sqrt(off);
        // Quadratic convergence stalls at rounding level; stop there.
        if off <= 1e-15 * scale || off >= prev_off {
            break;
        }
        prev_off = off;
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq.abs() <= f64::MIN_POSITIVE {
                    continue;
                }
                // Stable rotation angle (Golub & Van Loan).
                let tau = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + crate::real::fp::sqrt(1.0 + tau * tau))
                } else {
                    -1.0 / (-tau + crate::real::fp::sqrt(1.0 + tau * tau))
                };
                let c = 1.0 / crate::real::fp::sqrt(1.0 + t * t);
                let s = t * c;
                for k in 0..n {
                    let akp = m[(k, p)];
                    let akq = m[(k, q)];
                    m[(k, p)] = c * akp - s * akq;
                    m[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = m[(p, k)];
                    let aqk = m[(q, k)];
                    m[(p, k)] = c * apk - s * aqk;
                    m[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let w = (0..n).map(|i| m[(i, i)]).collect();
    (w, v)
}

/// Singular values of a square `f64` matrix, descending.
///
/// Computed as square roots of the eigenvalues of `A^T A`. The squaring
/// limits small values to about `1e-8 * sigma_max`; use
/// [`sym_singular_values`] when the matrix is symmetric and small values
/// matter.
pub fn singular_values(a: &Mat<f64>) -> Vec<f64> {
    let ata = a.transpose().mul_mat(a);
    let (mut w, _) = sym_eigen(&ata);
    for x in &mut w {
        *x = crate::real::fp::sqrt(x.max(0.0));
    }
    w.sort_by(|x, y| y.partial_cmp(x).unwrap());
    w
}

/// Singular values of a *symmetric* matrix: absolute eigenvalues,
/// descending. Accurate to machine precision relative to the norm, which
/// the rank decisions rely on.
pub fn sym_singular_values(a: &Mat<f64>) -> Vec<f64> {
    let (mut w, _) = sym_eigen(a);
    for x in &mut w {
        *x = x.abs();
    }
    w.sort_by(|x, y| y.partial_cmp(x).unwrap());
    w
}

/// All `k`-element index subsets of `0..n`, in lexicographic order.
pub(crate) fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        let remaining = k - cur.len();
        for i in start..=n.saturating_sub(remaining) {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lu_solves_small_system() {
        let a = Mat::from_fn(2, 2, |i, j| [[2.0, 1.0], [1.0, 3.0]][i][j]);
        let f = a.lu().unwrap();
        let x = f.solve(&[5.0, 10.0]);
        assert!((x[0] - 1.0).abs() < 1e-14);
        assert!((x[1] - 3.0).abs() < 1e-14);
        assert!((f.det() - 5.0).abs() < 1e-14);
    }

    #[test]
    fn lu_detects_singularity() {
        let a = Mat::from_fn(2, 2, |i, j| [[1.0, 2.0], [2.0, 4.0]][i][j]);
        assert!(a.lu().is_none());
        assert_eq!(a.det(), 0.0);
    }

    #[test]
    fn inverse_round_trip() {
        let a = Mat::from_fn(3, 3, |i, j| {
            [[4.0, 1.0, 0.5], [1.0, 3.0, -1.0], [0.5, -1.0, 2.0]][i][j]
        });
        let inv = a.inverse().unwrap();
        let id = a.mul_mat(&inv);
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((id[(i, j)] - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn jacobi_eigen_reconstructs() {
        let a = Mat::from_fn(3, 3, |i, j| {
            [[2.0, -1.0, 0.0], [-1.0, 2.0, -1.0], [0.0, -1.0, 2.0]][i][j]
        });
        let (w, v) = sym_eigen(&a);
        // A V = V diag(w)
        for j in 0..3 {
            let col: alloc::vec::Vec<f64> = (0..3).map(|i| v[(i, j)]).collect();
            let av = a.mul_vec(&col);
            for i in 0..3 {
                assert!((av[i] - w[j] * col[i]).abs() < 1e-10, "eigenpair {j}");
            }
        }
        // Known eigenvalues 2 - sqrt(2), 2, 2 + sqrt(2).
        let mut sorted = w.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((sorted[0] - (2.0 - 2.0_f64.sqrt())).abs() < 1e-12);
        assert!((sorted[1] - 2.0).abs() < 1e-12);
        assert!((sorted[2] - (2.0 + 2.0_f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn singular_values_of_diag() {
        let a = Mat::from_fn(2, 2, |i, j| [[3.0, 0.0], [0.0, -4.0]][i][j]);
        let s = singular_values(&a);
        assert!((s[0] - 4.0).abs() < 1e-12);
        assert!((s[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn subset_enumeration() {
        let s = subsets(4, 2);
        assert_eq!(s.len(), 6);
        assert_eq!(s[0], alloc::vec![0, 1]);
        assert_eq!(s[5], alloc::vec![2, 3]);
        assert_eq!(subsets(3, 0).len(), 1);
    }
}
