//! Independent reference computations for the integration tests.
#![allow(dead_code)]

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

/// Result of the proximal-gradient reference solver.
pub struct Fista {
    pub h: Array1<f64>,
    pub objective: f64,
    pub iterations: usize,
}

pub fn lasso_objective(x: ArrayView2<f64>, y: ArrayView1<f64>, h: &Array1<f64>, lambda: f64, w: &[f64]) -> f64 {
    let r = &y - &x.dot(h);
    0.5 * r.dot(&r) + lambda * h.iter().zip(w).map(|(a, b)| a.abs() * b).sum::<f64>()
}

/// Largest eigenvalue of `X^T X` by power iteration.
fn lipschitz(x: ArrayView2<f64>) -> f64 {
    let m = x.ncols();
    let mut v = Array1::from_iter((0..m).map(|i| 1.0 + (i as f64 * 0.37).sin()));
    let mut est = 0.0;
    for _ in 0..2000 {
        let u = x.t().dot(&x.dot(&v));
        let norm = u.dot(&u).sqrt();
        if norm == 0.0 {
            return 1.0;
        }
        let next = norm / v.dot(&v).sqrt();
        v = u / norm;
        if (next - est).abs() <= 1e-12 * next {
            est = next;
            break;
        }
        est = next;
    }
    est * 1.01
}

fn prox(v: f64, t: f64) -> f64 {
    v.signum() * (v.abs() - t).max(0.0)
}

/// Accelerated proximal gradient with adaptive restart for
/// `0.5 ||y - X h||^2 + lambda sum w_i |h_i|`. Stops when the proximal
/// gradient mapping has infinity norm below `tol`.
pub fn fista(x: ArrayView2<f64>, y: ArrayView1<f64>, lambda: f64, w: &[f64], tol: f64) -> Fista {
    let m = x.ncols();
    let step = 1.0 / lipschitz(x);
    let mut h = Array1::<f64>::zeros(m);
    let mut z = h.clone();
    let mut t = 1.0f64;
    let mut it = 0;
    while it < 2_000_000 {
        it += 1;
        let g = x.t().dot(&(&x.dot(&z) - &y));
        let next = Array1::from_iter((0..m).map(|i| prox(z[i] - step * g[i], step * lambda * w[i])));
        let mapping = (&z - &next).mapv(|d| (d / step).abs()).fold(0.0f64, |a, b| a.max(*b));
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let restart = (&z - &next).dot(&(&next - &h)) > 0.0;
        let mom = if restart { 0.0 } else { (t - 1.0) / t_next };
        z = &next + &((&next - &h) * mom);
        h = next;
        t = if restart { 1.0 } else { t_next };
        if mapping <= tol {
            break;
        }
    }
    let objective = lasso_objective(x, y, &h, lambda, w);
    Fista { h, objective, iterations: it }
}

/// Ridge by normal equations with Gaussian elimination (partial pivoting).
pub fn ridge_normal_equations(x: ArrayView2<f64>, y: ArrayView1<f64>, delta: f64) -> Array1<f64> {
    let m = x.ncols();
    let mut a = x.t().dot(&x);
    for i in 0..m {
        a[[i, i]] += delta;
    }
    let b = x.t().dot(&y);
    solve_dense(a, b)
}

pub fn solve_dense(mut a: Array2<f64>, mut b: Array1<f64>) -> Array1<f64> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[[i, c]].abs().total_cmp(&a[[j, c]].abs())).unwrap();
        if p != c {
            for k in 0..n {
                a.swap([c, k], [p, k]);
            }
            b.swap(c, p);
        }
        for r in c + 1..n {
            let f = a[[r, c]] / a[[c, c]];
            if f != 0.0 {
                for k in c..n {
                    a[[r, k]] -= f * a[[c, k]];
                }
                b[r] -= f * b[c];
            }
        }
    }
    let mut out = Array1::zeros(n);
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| a[[r, k]] * out[k]).sum();
        out[r] = (b[r] - s) / a[[r, r]];
    }
    out
}

/// Redundant monomial features: every ordered index tuple of length 0..=P.
pub fn kronecker_features(x: &[f64], order: usize) -> Vec<f64> {
    let mut out = vec![1.0];
    let mut level = vec![1.0];
    for _ in 0..order {
        let mut next = Vec::with_capacity(level.len() * x.len());
        for a in &level {
            for b in x {
                next.push(a * b);
            }
        }
        out.extend_from_slice(&next);
        level = next;
    }
    out
}

/// Exact binomial coefficient, for closed-form dimensions.
pub fn binom(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Largest eigenvalue deviation from 1 over all `s`-column
/// Gram submatrices, by Jacobi rotations.
pub fn exact_rip(x: ArrayView2<f64>, s: usize) -> f64 {
    let m = x.ncols();
    let g = x.t().dot(&x);
    let mut idx: Vec<usize> = (0..s).collect();
    let mut worst = 0.0f64;
    loop {
        let mut sub = Array2::zeros((s, s));
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                sub[[a, b]] = g[[i, j]];
            }
        }
        for ev in jacobi_eigenvalues(sub) {
            worst = worst.max((ev - 1.0).abs());
        }
        // next combination
        let mut k = s;
        loop {
            if k == 0 {
                return worst;
            }
            k -= 1;
            if idx[k] < m - s + k {
                idx[k] += 1;
                for t in k + 1..s {
                    idx[t] = idx[t - 1] + 1;
                }
                break;
            }
        }
    }
}

pub fn jacobi_eigenvalues(mut a: Array2<f64>) -> Vec<f64> {
    let n = a.nrows();
    for _ in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += a[[p, q]] * a[[p, q]];
            }
        }
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[[p, q]].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[[q, q]] - a[[p, p]]) / (2.0 * a[[p, q]]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[[k, p]];
                    let akq = a[[k, q]];
                    a[[k, p]] = c * akp - s * akq;
                    a[[k, q]] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[[p, k]];
                    let aqk = a[[q, k]];
                    a[[p, k]] = c * apk - s * aqk;
                    a[[q, k]] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[[i, i]]).collect()
}
