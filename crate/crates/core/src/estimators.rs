//! Batch estimators: ridge (primal, dual, kernel trick) and the (weighted)
//! Lasso solved by cyclic coordinate descent.

use std::sync::Arc;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{gram, outer_gram, symmetric_eigen, Cholesky};
use crate::polymodel::{BasisCatalog, CoefficientVector};
use crate::problem::{Preprocess, RegressionProblem, Transform};

/// Cap applied to inverse-magnitude weights of zero ridge coefficients.
pub const DEFAULT_WEIGHT_CAP: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RidgeMode {
    /// `(X^T X + delta I)^-1 X^T y`.
    Primal,
    /// `X^T (X X^T + delta I)^-1 y`.
    Dual,
    /// Primal iff `M <= N`.
    Auto,
}

/// Ridge coefficients on raw arrays.
pub fn ridge_solve(x: ArrayView2<f64>, y: ArrayView1<f64>, delta: f64, mode: RidgeMode) -> Result<Array1<f64>> {
    if !(delta > 0.0) {
        return Err(invalid("ridge delta must be positive"));
    }
    let (n, m) = x.dim();
    if y.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: y.len() });
    }
    let primal = match mode {
        RidgeMode::Primal => true,
        RidgeMode::Dual => false,
        RidgeMode::Auto => m <= n,
    };
    if primal {
        let mut a = gram(x);
        a.diag_mut().mapv_inplace(|v| v + delta);
        let rhs = x.t().dot(&y);
        Ok(Cholesky::factor(a.view())?.solve(rhs.view()))
    } else {
        let mut k = outer_gram(x);
        k.diag_mut().mapv_inplace(|v| v + delta);
        let alpha = Cholesky::factor(k.view())?.solve(y);
        Ok(x.t().dot(&alpha))
    }
}

pub fn ridge_fit(problem: &RegressionProblem, delta: f64, mode: RidgeMode) -> Result<CoefficientVector> {
    let h = ridge_solve(problem.x.view(), problem.y.view(), delta, mode)?;
    CoefficientVector::new(problem.catalog.clone(), h)
}

/// Ridge solutions for many `delta` from one eigendecomposition of the
/// smaller Gram matrix.
#[derive(Debug, Clone)]
pub struct RidgePath {
    // Primal: h = V diag(1/(l+d)) V^T X^T y.  Dual: h = X^T U diag(1/(l+d)) U^T y.
    eigvals: Array1<f64>,
    basis: Array2<f64>,
    projected: Array1<f64>,
    xt_u: Option<Array2<f64>>,
}

impl RidgePath {
    pub fn new(x: ArrayView2<f64>, y: ArrayView1<f64>) -> Self {
        let (n, m) = x.dim();
        if m <= n {
            let (vals, vecs) = symmetric_eigen(gram(x).view());
            let projected = vecs.t().dot(&x.t().dot(&y));
            RidgePath {
                eigvals: vals,
                basis: vecs,
                projected,
                xt_u: None,
            }
        } else {
            let (vals, vecs) = symmetric_eigen(outer_gram(x).view());
            let projected = vecs.t().dot(&y);
            let xt_u = x.t().dot(&vecs);
            RidgePath {
                eigvals: vals,
                basis: vecs,
                projected,
                xt_u: Some(xt_u),
            }
        }
    }

    pub fn solve(&self, delta: f64) -> Array1<f64> {
        let coef = self
            .projected
            .iter()
            .zip(self.eigvals.iter())
            .map(|(p, l)| p / (l.max(0.0) + delta))
            .collect::<Array1<f64>>();
        match &self.xt_u {
            None => self.basis.dot(&coef),
            Some(xt_u) => xt_u.dot(&coef),
        }
    }
}

/// Inhomogeneous polynomial kernel matrix `K[a,b] = sum_{p=0}^P (x_a . x_b)^p`.
pub fn kernel_gram(inputs: ArrayView2<f64>, order: usize) -> Array2<f64> {
    let inner = outer_gram(inputs);
    inner.mapv(|t| {
        let mut acc = 0.0;
        let mut pow = 1.0;
        for _ in 0..=order {
            acc += pow;
            pow *= t;
        }
        acc
    })
}

/// Ridge over the full (redundant) monomial features via the kernel trick,
/// folded onto the non-redundant catalog.
///
/// Returns the catalog coefficients of the redundant ridge solution: each key
/// collects its redundant coefficient times the key multiplicity.
pub fn kernel_ridge_fit(
    catalog: Arc<BasisCatalog>,
    inputs: ArrayView2<f64>,
    y: ArrayView1<f64>,
    delta: f64,
) -> Result<CoefficientVector> {
    if !catalog.kind().allows_repeats() {
        return Err(invalid("kernel trick applies to full polynomial / volterra catalogs"));
    }
    if !(delta > 0.0) {
        return Err(invalid("ridge delta must be positive"));
    }
    let mut k = kernel_gram(inputs, catalog.order());
    k.diag_mut().mapv_inplace(|v| v + delta);
    let alpha = Cholesky::factor(k.view())?.solve(y);
    let x = catalog.build_matrix_from_samples(inputs)?;
    let folded = x.t().dot(&alpha);
    let mult = catalog
        .keys()
        .iter()
        .map(|k| k.multiplicity() as f64)
        .collect::<Array1<f64>>();
    CoefficientVector::new(catalog, folded * mult)
}

/// `sign(z) max(|z| - lw, 0) / r`.
pub fn soft_threshold(z: f64, r: f64, lw: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(invalid(format!("soft threshold needs R_ii > 0, got {r}")));
    }
    Ok(shrink(z, lw) / r)
}

#[inline]
fn shrink(z: f64, lw: f64) -> f64 {
    let a = z.abs() - lw;
    if a > 0.0 {
        a.copysign(z)
    } else {
        0.0
    }
}

/// Per-coefficient penalty weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Weights {
    /// `w_i = 1` for every coefficient.
    Uniform,
    Explicit(Vec<f64>),
}

impl Weights {
    pub fn resolve(&self, m: usize) -> Result<Vec<f64>> {
        match self {
            Weights::Uniform => Ok(vec![1.0; m]),
            Weights::Explicit(w) => {
                if w.len() != m {
                    return Err(Error::DimensionMismatch { expected: m, got: w.len() });
                }
                if w.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
                    return Err(invalid("weights must be finite and non-negative"));
                }
                Ok(w.clone())
            }
        }
    }
}

/// How the coordinate correlations `z_i` are maintained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CcdMode {
    /// Precompute `R = X^T X`, update `z` by columns of `R`: `O(M)` per coordinate.
    Gram,
    /// Keep the residual `y - X h`: `O(N)` per coordinate, no `M x M` storage.
    Residual,
    /// Gram when `M <= 2000` and `M <= 4 N`, residual otherwise.
    Auto,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub lambda: f64,
    pub weights: Weights,
    pub tol: f64,
    pub max_sweeps: usize,
    pub weight_cap: f64,
    pub mode: CcdMode,
    /// Between full sweeps, cycle only over the current nonzeros until they
    /// settle. Same minimizer, fewer `O(M)` passes.
    pub active_set: bool,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            lambda: 0.0,
            weights: Weights::Uniform,
            tol: 1e-8,
            max_sweeps: 10_000,
            weight_cap: DEFAULT_WEIGHT_CAP,
            mode: CcdMode::Gram,
            active_set: false,
        }
    }
}

impl EstimatorConfig {
    pub fn with_lambda(lambda: f64) -> Self {
        EstimatorConfig {
            lambda,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(invalid("lambda must be finite and non-negative"));
        }
        if !(self.tol > 0.0) {
            return Err(invalid("tol must be positive"));
        }
        if !(self.weight_cap > 0.0) {
            return Err(invalid("weight cap must be positive"));
        }
        if self.max_sweeps == 0 {
            return Err(invalid("max_sweeps must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct FitReport {
    pub h: CoefficientVector,
    /// Coordinate passes performed (full and active-set).
    pub sweeps: usize,
    pub objective: f64,
    pub kkt_gap: f64,
    pub converged: bool,
    /// Objective after each pass.
    pub objective_trace: Vec<f64>,
}

#[derive(Serialize)]
struct FitReportJson<'a> {
    coefficients: Vec<(String, f64)>,
    objective: f64,
    sweeps: usize,
    kkt_gap: f64,
    converged: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    estimator: Option<&'a str>,
}

impl FitReport {
    /// JSON with coefficients keyed by catalog strings (nonzeros only).
    pub fn to_json(&self, estimator: Option<&str>) -> serde_json::Value {
        let coefficients = self.h.named().into_iter().filter(|(_, v)| *v != 0.0).collect();
        serde_json::to_value(FitReportJson {
            coefficients,
            objective: self.objective,
            sweeps: self.sweeps,
            kkt_gap: self.kkt_gap,
            converged: self.converged,
            estimator,
        })
        .expect("serializable")
    }
}

enum Store {
    Gram { r: Array2<f64> },
    Residual { xt: Array2<f64> },
}

/// Precomputed data for repeated Lasso solves on one design (warm-started
/// paths, cross-validation folds).
pub struct LassoEngine {
    store: Store,
    xty: Array1<f64>,
    yty: f64,
    y: Array1<f64>,
    diag: Array1<f64>,
}

/// Raw solver output.
#[derive(Debug, Clone)]
pub struct LassoSolution {
    pub h: Array1<f64>,
    pub sweeps: usize,
    pub objective: f64,
    pub kkt_gap: f64,
    pub converged: bool,
    pub objective_trace: Vec<f64>,
}

impl LassoEngine {
    pub fn new(x: ArrayView2<f64>, y: ArrayView1<f64>, mode: CcdMode) -> Result<Self> {
        let (n, m) = x.dim();
        if y.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: y.len() });
        }
        if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
            return Err(invalid("design and response must be finite"));
        }
        let use_gram = match mode {
            CcdMode::Gram => true,
            CcdMode::Residual => false,
            CcdMode::Auto => m <= 2000 && m <= 4 * n,
        };
        let xty = x.t().dot(&y);
        let yty = y.dot(&y);
        let diag = x.map_axis(Axis(0), |c| c.dot(&c));
        let store = if use_gram {
            Store::Gram { r: gram(x) }
        } else {
            Store::Residual {
                xt: x.t().as_standard_layout().into_owned(),
            }
        };
        Ok(LassoEngine {
            store,
            xty,
            yty,
            y: y.to_owned(),
            diag,
        })
    }

    /// Gram-mode engine from sufficient statistics `X^T X`, `X^T y`, `y^T y`.
    pub fn from_moments(r: Array2<f64>, xty: Array1<f64>, yty: f64) -> Result<Self> {
        let m = xty.len();
        if r.dim() != (m, m) {
            return Err(Error::DimensionMismatch { expected: m, got: r.nrows() });
        }
        let diag = r.diag().to_owned();
        let r = r.as_standard_layout().into_owned();
        Ok(LassoEngine {
            store: Store::Gram { r },
            xty,
            yty,
            y: Array1::zeros(0),
            diag,
        })
    }

    pub fn n_features(&self) -> usize {
        self.xty.len()
    }

    /// Smallest `lambda` for which `h = 0` is optimal, `max_i |x_i^T y| / w_i`
    /// over penalized coordinates.
    pub fn lambda_max(&self, weights: &[f64]) -> f64 {
        self.xty
            .iter()
            .zip(weights)
            .filter(|(_, w)| **w > 0.0)
            .map(|(c, w)| c.abs() / w)
            .fold(0.0, f64::max)
    }

    /// Gradient `X^T (y - X h)`.
    fn correlations(&self, h: &Array1<f64>) -> Array1<f64> {
        match &self.store {
            Store::Gram { r } => &self.xty - &r.dot(h),
            Store::Residual { xt } => {
                let resid = &self.y - &xt.t().dot(h);
                xt.dot(&resid)
            }
        }
    }

    fn objective_from(&self, h: &Array1<f64>, z: &Array1<f64>, lambda: f64, w: &[f64]) -> f64 {
        // ||y - Xh||^2 = y^T y - h^T X^T y - h^T z  with z = X^T (y - X h).
        let rss = (self.yty - h.dot(&self.xty) - h.dot(z)).max(0.0);
        0.5 * rss + lambda * penalty(h, w)
    }

    /// Minimizes `1/2 ||y - Xh||^2 + lambda sum w_i |h_i|` from `h0`.
    pub fn solve(&self, cfg: &EstimatorConfig, weights: &[f64], h0: Option<&Array1<f64>>) -> Result<LassoSolution> {
        cfg.validate()?;
        let m = self.n_features();
        if weights.len() != m {
            return Err(Error::DimensionMismatch { expected: m, got: weights.len() });
        }
        let lw: Vec<f64> = weights.iter().map(|w| cfg.lambda * w.min(cfg.weight_cap)).collect();
        let mut h = match h0 {
            Some(h0) if h0.len() != m => {
                return Err(Error::DimensionMismatch { expected: m, got: h0.len() })
            }
            Some(h0) => h0.clone(),
            None => Array1::zeros(m),
        };
        // Coordinates with an all-zero column carry no information; keep them at 0.
        for i in 0..m {
            if self.diag[i] <= 0.0 {
                h[i] = 0.0;
            }
        }
        let mut state = match &self.store {
            Store::Gram { .. } => CcdState::Gram {
                z: self.correlations(&h),
            },
            Store::Residual { xt } => CcdState::Residual {
                resid: &self.y - &xt.t().dot(&h),
            },
        };
        let all: Vec<usize> = (0..m).filter(|&i| self.diag[i] > 0.0).collect();
        let mut trace = Vec::new();
        let mut sweeps = 0;
        let mut converged = false;
        while sweeps < cfg.max_sweeps {
            let change = self.pass(&all, &lw, &mut h, &mut state);
            sweeps += 1;
            trace.push(self.state_objective(&h, &state, cfg.lambda, weights, cfg.weight_cap));
            if change <= cfg.tol {
                converged = true;
                break;
            }
            if cfg.active_set {
                let active: Vec<usize> = all.iter().copied().filter(|&i| h[i] != 0.0).collect();
                while sweeps < cfg.max_sweeps {
                    let c = self.pass(&active, &lw, &mut h, &mut state);
                    sweeps += 1;
                    trace.push(self.state_objective(&h, &state, cfg.lambda, weights, cfg.weight_cap));
                    if c <= cfg.tol {
                        break;
                    }
                }
            }
        }
        let z = self.correlations(&h);
        let capped: Vec<f64> = weights.iter().map(|w| w.min(cfg.weight_cap)).collect();
        let objective = self.objective_from(&h, &z, cfg.lambda, &capped);
        let kkt_gap = kkt_from_gradient(&h, &z, cfg.lambda, &capped);
        Ok(LassoSolution {
            h,
            sweeps,
            objective,
            kkt_gap,
            converged,
            objective_trace: trace,
        })
    }

    fn state_objective(&self, h: &Array1<f64>, state: &CcdState, lambda: f64, w: &[f64], cap: f64) -> f64 {
        let pen: f64 = h.iter().zip(w).map(|(v, w)| w.min(cap) * v.abs()).sum();
        match state {
            CcdState::Gram { z } => {
                let rss = (self.yty - h.dot(&self.xty) - h.dot(z)).max(0.0);
                0.5 * rss + lambda * pen
            }
            CcdState::Residual { resid } => 0.5 * resid.dot(resid) + lambda * pen,
        }
    }

    /// One cyclic pass over `coords`; returns the largest coefficient change.
    fn pass(&self, coords: &[usize], lw: &[f64], h: &mut Array1<f64>, state: &mut CcdState) -> f64 {
        let mut max_change = 0.0f64;
        match (&self.store, state) {
            (Store::Gram { r }, CcdState::Gram { z }) => {
                let zs = z.as_slice_mut().expect("contiguous");
                for &i in coords {
                    let old = h[i];
                    let ri = r.row(i);
                    let ri = ri.as_slice().expect("row-major");
                    let rii = ri[i];
                    // z-lift: z + r_i h_i, then threshold, then restore with the new value.
                    let zi = zs[i] + rii * old;
                    let new = shrink(zi, lw[i]) / rii;
                    let d = new - old;
                    if d != 0.0 {
                        for (zj, rj) in zs.iter_mut().zip(ri) {
                            *zj -= rj * d;
                        }
                        h[i] = new;
                        max_change = max_change.max(d.abs());
                    }
                }
            }
            (Store::Residual { xt }, CcdState::Residual { resid }) => {
                let rs = resid.as_slice_mut().expect("contiguous");
                for &i in coords {
                    let old = h[i];
                    let xi = xt.row(i);
                    let xi = xi.as_slice().expect("row-major");
                    let rii = self.diag[i];
                    let zi: f64 = xi.iter().zip(rs.iter()).map(|(a, b)| a * b).sum::<f64>() + rii * old;
                    let new = shrink(zi, lw[i]) / rii;
                    let d = new - old;
                    if d != 0.0 {
                        for (rj, xj) in rs.iter_mut().zip(xi) {
                            *rj -= xj * d;
                        }
                        h[i] = new;
                        max_change = max_change.max(d.abs());
                    }
                }
            }
            _ => unreachable!("state matches store"),
        }
        max_change
    }
}

enum CcdState {
    Gram { z: Array1<f64> },
    Residual { resid: Array1<f64> },
}

fn penalty(h: &Array1<f64>, w: &[f64]) -> f64 {
    h.iter().zip(w).map(|(v, w)| w * v.abs()).sum()
}

fn kkt_from_gradient(h: &Array1<f64>, g: &Array1<f64>, lambda: f64, w: &[f64]) -> f64 {
    h.iter()
        .zip(g.iter())
        .zip(w)
        .map(|((hi, gi), wi)| {
            let lw = lambda * wi;
            if *hi == 0.0 {
                (gi.abs() - lw).max(0.0)
            } else {
                (gi - lw * hi.signum()).abs()
            }
        })
        .fold(0.0, f64::max)
}

/// Cyclic coordinate descent for the (weighted) Lasso.
pub fn ccd_lasso_fit(
    problem: &RegressionProblem,
    cfg: &EstimatorConfig,
    h0: Option<&CoefficientVector>,
) -> Result<FitReport> {
    let engine = LassoEngine::new(problem.x.view(), problem.y.view(), cfg.mode)?;
    let w = cfg.weights.resolve(problem.n_features())?;
    let sol = engine.solve(cfg, &w, h0.map(|h| h.values()))?;
    Ok(FitReport {
        h: CoefficientVector::new(problem.catalog.clone(), sol.h)?,
        sweeps: sol.sweeps,
        objective: sol.objective,
        kkt_gap: sol.kkt_gap,
        converged: sol.converged,
        objective_trace: sol.objective_trace,
    })
}

/// Warm-started solutions along `lambdas` (solved in the given order).
pub fn lasso_path(
    engine: &LassoEngine,
    cfg: &EstimatorConfig,
    weights: &[f64],
    lambdas: &[f64],
) -> Result<Vec<LassoSolution>> {
    let mut out: Vec<LassoSolution> = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let c = EstimatorConfig {
            lambda,
            ..cfg.clone()
        };
        let warm = out.last().map(|s| s.h.clone());
        out.push(engine.solve(&c, weights, warm.as_ref())?);
    }
    Ok(out)
}

/// Inverse-magnitude weights from ridge estimates, capped; the intercept is
/// left unpenalized.
pub fn wlasso_weights(h_ridge: &CoefficientVector, cap: f64) -> Vec<f64> {
    let icpt = h_ridge.catalog().intercept_position();
    h_ridge
        .values()
        .iter()
        .enumerate()
        .map(|(i, v)| if i == icpt { 0.0 } else { inverse_weight(*v, cap) })
        .collect()
}

#[inline]
pub(crate) fn inverse_weight(v: f64, cap: f64) -> f64 {
    let a = v.abs();
    if a > 0.0 {
        (1.0 / a).min(cap)
    } else {
        cap
    }
}

/// Objective `1/2 ||y - Xh||^2 + lambda sum w_i |h_i|` and the largest
/// subgradient-condition violation.
pub fn optimality_gap(h: &CoefficientVector, problem: &RegressionProblem, lambda: f64, weights: &Weights) -> Result<(f64, f64)> {
    let w = weights.resolve(problem.n_features())?;
    let hv = h.values();
    if hv.len() != problem.n_features() {
        return Err(Error::DimensionMismatch {
            expected: problem.n_features(),
            got: hv.len(),
        });
    }
    let resid = &problem.y - &problem.x.dot(hv);
    let g = problem.x.t().dot(&resid);
    let objective = 0.5 * resid.dot(&resid) + lambda * penalty(hv, &w);
    Ok((objective, kkt_from_gradient(hv, &g, lambda, &w)))
}

/// A batch estimator with its regularization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "estimator", rename_all = "lowercase")]
pub enum Estimator {
    Ridge { delta: f64 },
    Lasso { lambda: f64 },
    /// Weights from a ridge fit with `delta`.
    Wlasso { lambda: f64, delta: f64 },
}

impl Estimator {
    pub fn name(&self) -> &'static str {
        match self {
            Estimator::Ridge { .. } => "ridge",
            Estimator::Lasso { .. } => "lasso",
            Estimator::Wlasso { .. } => "wlasso",
        }
    }
}

/// Fits `est` after optional centering / standardization; coefficients are
/// mapped back to the original columns with the intercept recovered from the
/// sample means.
pub fn fit_estimator(
    problem: &RegressionProblem,
    est: Estimator,
    prep: Preprocess,
    base: &EstimatorConfig,
) -> Result<FitReport> {
    let (tp, tr) = Transform::apply(problem, prep);
    let (h_t, sweeps, converged) = match est {
        Estimator::Ridge { delta } => {
            let h = ridge_solve(tp.x.view(), tp.y.view(), delta, RidgeMode::Auto)?;
            (h, 0, true)
        }
        Estimator::Lasso { lambda } => {
            let cfg = EstimatorConfig {
                lambda,
                weights: Weights::Uniform,
                ..base.clone()
            };
            let r = ccd_lasso_fit(&tp, &cfg, None)?;
            let (s, c) = (r.sweeps, r.converged);
            (r.h.into_values(), s, c)
        }
        Estimator::Wlasso { lambda, delta } => {
            let ridge = ridge_fit(&tp, delta, RidgeMode::Auto)?;
            let w = wlasso_weights(&ridge, base.weight_cap);
            let cfg = EstimatorConfig {
                lambda,
                weights: Weights::Explicit(w),
                ..base.clone()
            };
            let r = ccd_lasso_fit(&tp, &cfg, None)?;
            let (s, c) = (r.sweeps, r.converged);
            (r.h.into_values(), s, c)
        }
    };
    let h = tr.restore(&problem.catalog, &h_t)?;
    // Report optimality on the transformed problem, where the penalty lives.
    let (lambda, weights) = match est {
        Estimator::Ridge { .. } => (0.0, Weights::Uniform),
        Estimator::Lasso { lambda } => (lambda, Weights::Uniform),
        Estimator::Wlasso { lambda, delta } => {
            let ridge = ridge_fit(&tp, delta, RidgeMode::Auto)?;
            (lambda, Weights::Explicit(wlasso_weights(&ridge, base.weight_cap)))
        }
    };
    let ht = CoefficientVector::new(problem.catalog.clone(), h_t)?;
    let (objective, kkt_gap) = match est {
        Estimator::Ridge { delta } => {
            let resid = &tp.y - &tp.x.dot(ht.values());
            let obj = 0.5 * resid.dot(&resid) + 0.5 * delta * ht.values().dot(ht.values());
            (obj, f64::NAN)
        }
        _ => optimality_gap(&ht, &tp, lambda, &weights)?,
    };
    Ok(FitReport {
        h,
        sweeps,
        objective,
        kkt_gap,
        converged,
        objective_trace: Vec::new(),
    })
}
