//! Dense helpers: Cholesky factorization with rank-one updates, triangular
//! solves, and a symmetric eigen bridge.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::error::{Error, Result};

/// Cholesky factorization `A = U^T U`, stored as the upper factor `U` so
/// that the rank-one update walks contiguous rows.
#[derive(Debug, Clone)]
pub struct Cholesky {
    u: Array2<f64>,
}

impl Cholesky {
    pub fn factor(a: ArrayView2<f64>) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: a.ncols(),
            });
        }
        // Row-major lower factor first (dot products over contiguous rows).
        let mut l = Array2::<f64>::zeros((n, n));
        {
            let ls = l.as_slice_mut().expect("row-major");
            for j in 0..n {
                let (head, tail) = ls.split_at_mut(j * n + n);
                let row_j = &head[j * n..j * n + n];
                let d = a[[j, j]] - dot(&row_j[..j], &row_j[..j]);
                if !(d > 0.0) || !d.is_finite() {
                    return Err(Error::Singular(format!(
                        "non-positive pivot {d:e} at column {j}"
                    )));
                }
                let d = d.sqrt();
                head[j * n + j] = d;
                let row_j = &head[j * n..j * n + j];
                for i in (j + 1)..n {
                    let off = (i - j - 1) * n;
                    let row_i = &mut tail[off..off + n];
                    row_i[j] = (a[[i, j]] - dot(&row_i[..j], row_j)) / d;
                }
            }
        }
        Ok(Cholesky {
            u: l.t().as_standard_layout().into_owned(),
        })
    }

    /// Factor of `delta I`.
    pub fn scaled_identity(n: usize, delta: f64) -> Self {
        let mut u = Array2::zeros((n, n));
        u.diag_mut().fill(delta.sqrt());
        Cholesky { u }
    }

    pub fn dim(&self) -> usize {
        self.u.nrows()
    }

    /// Lower factor `L = U^T`.
    pub fn lower(&self) -> Array2<f64> {
        self.u.t().to_owned()
    }

    /// `A <- beta A`.
    pub fn scale(&mut self, beta: f64) {
        let s = beta.sqrt();
        self.u.mapv_inplace(|v| v * s);
    }

    /// `A <- A + x x^T` in `O(n^2)`; returns the multiply-add count.
    pub fn rank_one_update(&mut self, x: ArrayView1<f64>) -> u64 {
        let n = self.dim();
        let mut w = x.to_vec();
        let us = self.u.as_slice_mut().expect("row-major");
        let mut ops = 0u64;
        for k in 0..n {
            let row = &mut us[k * n..(k + 1) * n];
            let ukk = row[k];
            let r = ukk.hypot(w[k]);
            let c = r / ukk;
            let s = w[k] / ukk;
            row[k] = r;
            for i in (k + 1)..n {
                let uki = (row[i] + s * w[i]) / c;
                w[i] = c * w[i] - s * uki;
                row[i] = uki;
            }
            ops += (n - k) as u64;
        }
        ops
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: ArrayView1<f64>) -> Array1<f64> {
        let n = self.dim();
        let us = self.u.as_slice().expect("row-major");
        let mut y = b.to_vec();
        // U^T y = b, column sweep over rows of U.
        for k in 0..n {
            let row = &us[k * n..(k + 1) * n];
            y[k] /= row[k];
            let yk = y[k];
            for i in (k + 1)..n {
                y[i] -= row[i] * yk;
            }
        }
        // U x = y.
        for i in (0..n).rev() {
            let row = &us[i * n..(i + 1) * n];
            let s = y[i] - dot(&row[i + 1..], &y[i + 1..]);
            y[i] = s / row[i];
        }
        Array1::from(y)
    }
}

/// `X^T X`.
pub fn gram(x: ArrayView2<f64>) -> Array2<f64> {
    x.t().dot(&x)
}

/// `X X^T`.
pub fn outer_gram(x: ArrayView2<f64>) -> Array2<f64> {
    x.dot(&x.t())
}

/// Eigenvalues (ascending) and eigenvectors (columns) of a symmetric matrix.
pub fn symmetric_eigen(a: ArrayView2<f64>) -> (Array1<f64>, Array2<f64>) {
    let n = a.nrows();
    let m = nalgebra::DMatrix::from_fn(n, n, |i, j| a[[i, j]]);
    let eig = m.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect::<Array1<f64>>();
    let mut vecs = Array2::zeros((n, n));
    for (c, &i) in order.iter().enumerate() {
        for r in 0..n {
            vecs[[r, c]] = eig.eigenvectors[(r, i)];
        }
    }
    (vals, vecs)
}

/// Extreme eigenvalues of a symmetric matrix.
pub fn symmetric_extremes(a: ArrayView2<f64>) -> (f64, f64) {
    let n = a.nrows();
    let m = nalgebra::DMatrix::from_fn(n, n, |i, j| a[[i, j]]);
    let ev = m.symmetric_eigenvalues();
    let lo = ev.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ev.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn max_abs(v: ArrayView1<f64>) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn factor_and_solve() {
        let a = array![[4.0, 2.0, 0.6], [2.0, 5.0, 1.0], [0.6, 1.0, 3.0]];
        let ch = Cholesky::factor(a.view()).unwrap();
        let b = array![1.0, -2.0, 0.5];
        let x = ch.solve(b.view());
        let r = a.dot(&x) - &b;
        assert!(max_abs(r.view()) < 1e-14);
        let l = ch.lower();
        assert!(max_abs((l.dot(&l.t()) - &a).view().into_shape_with_order(9).unwrap()) < 1e-14);
    }

    #[test]
    fn rank_one_matches_refactor() {
        let mut a = array![[2.0, 0.3, 0.0], [0.3, 1.5, -0.2], [0.0, -0.2, 1.0]];
        let mut ch = Cholesky::factor(a.view()).unwrap();
        let x = array![0.7, -1.1, 0.4];
        ch.scale(0.9);
        ch.rank_one_update(x.view());
        a *= 0.9;
        for i in 0..3 {
            for j in 0..3 {
                a[[i, j]] += x[i] * x[j];
            }
        }
        let fresh = Cholesky::factor(a.view()).unwrap();
        let d = ch.lower() - fresh.lower();
        assert!(d.iter().all(|v| v.abs() < 1e-13));
    }

    #[test]
    fn singular_is_reported() {
        let a = array![[1.0, 1.0], [1.0, 1.0]];
        assert!(matches!(Cholesky::factor(a.view()), Err(Error::Singular(_))));
    }

    #[test]
    fn eigen_sorted() {
        let a = array![[2.0, 1.0], [1.0, 2.0]];
        let (vals, vecs) = symmetric_eigen(a.view());
        assert!((vals[0] - 1.0).abs() < 1e-12 && (vals[1] - 3.0).abs() < 1e-12);
        let v = vecs.column(1);
        assert!((v[0].abs() - v[1].abs()).abs() < 1e-12);
        assert_eq!(symmetric_extremes(a.view()).0.round(), 1.0);
    }
}
