use ndarray::{Array1, Axis};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::estimators::{wlasso_weights, EstimatorConfig, LassoEngine, RidgePath, Weights};
use crate::polymodel::CoefficientVector;
use crate::problem::{Preprocess, RegressionProblem, Transform};
use crate::synth::rng_for;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Folds {
    K(usize),
    LeaveOneOut,
}

impl Folds {
    pub fn count(&self, n: usize) -> usize {
        match *self {
            Folds::K(v) => v,
            Folds::LeaveOneOut => n,
        }
    }
}

/// Validation indices per fold. K-fold shuffles with `seed` and deals
/// positions round-robin; leave-one-out is unshuffled.
pub fn fold_assignment(n: usize, folds: Folds, seed: u64) -> Result<Vec<Vec<usize>>> {
    let v = folds.count(n);
    if v < 2 {
        return Err(invalid("need at least 2 folds"));
    }
    if v > n {
        return Err(Error::InsufficientSamples { needed: v, available: n });
    }
    let mut order: Vec<usize> = (0..n).collect();
    if let Folds::K(_) = folds {
        order.shuffle(&mut rng_for(seed, 0));
    }
    let mut out = vec![Vec::new(); v];
    for (p, i) in order.into_iter().enumerate() {
        out[p % v].push(i);
    }
    for f in &mut out {
        f.sort_unstable();
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "estimator", rename_all = "lowercase")]
pub enum CvEstimator {
    /// Tunes `delta`.
    Ridge,
    /// Tunes `lambda`.
    Lasso,
    /// Tunes `lambda`; weights come from ridge with `delta`, or with the
    /// cross-validated ridge `delta` when absent.
    Wlasso { delta: Option<f64> },
}

impl CvEstimator {
    pub fn name(&self) -> &'static str {
        match self {
            CvEstimator::Ridge => "ridge",
            CvEstimator::Lasso => "lasso",
            CvEstimator::Wlasso { .. } => "wlasso",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvSpec {
    pub estimator: CvEstimator,
    /// Explicit grid; generated when `None`.
    pub grid: Option<Vec<f64>>,
    pub grid_points: usize,
    pub folds: Folds,
    pub seed: u64,
    #[serde(skip, default = "default_prep")]
    pub preprocess: Preprocess,
    #[serde(skip)]
    pub solver: EstimatorConfig,
}

fn default_prep() -> Preprocess {
    Preprocess::CENTER
}

impl CvSpec {
    pub fn new(estimator: CvEstimator, folds: Folds) -> Self {
        CvSpec {
            estimator,
            grid: None,
            grid_points: 100,
            folds,
            seed: 0,
            preprocess: Preprocess::CENTER,
            solver: EstimatorConfig {
                active_set: true,
                mode: crate::estimators::CcdMode::Auto,
                tol: 1e-6,
                ..Default::default()
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub estimator: String,
    pub parameter: f64,
    pub pe: f64,
    pub grid: Vec<f64>,
    pub pe_curve: Vec<f64>,
    /// Standard deviation of the per-fold contributions at the best parameter,
    /// scaled to the PE total.
    pub fold_sd: f64,
    /// Ridge `delta` that fixed the weights (weighted Lasso only).
    pub ridge_delta: Option<f64>,
    pub folds: usize,
}

/// `n_points` values from `hi` down to `hi * ratio`, geometric.
pub fn geometric_grid(hi: f64, ratio: f64, n_points: usize) -> Vec<f64> {
    if n_points <= 1 {
        return vec![hi];
    }
    let step = ratio.ln() / (n_points - 1) as f64;
    (0..n_points).map(|k| hi * (step * k as f64).exp()).collect()
}

/// Default ridge grid `N * 10^t`, `t` uniform in `[-3, 4]`.
pub fn ridge_grid(n: usize, points: usize) -> Vec<f64> {
    let mut g = geometric_grid(n as f64 * 1e4, 1e-7, points);
    g.reverse();
    g
}

struct Split {
    test: RegressionProblem,
    tr: Transform,
    tp: RegressionProblem,
}

fn splits(problem: &RegressionProblem, folds: &[Vec<usize>], prep: Preprocess) -> Vec<Split> {
    let n = problem.n_samples();
    folds
        .iter()
        .map(|val| {
            let mut mask = vec![true; n];
            for &i in val {
                mask[i] = false;
            }
            let train_idx: Vec<usize> = (0..n).filter(|&i| mask[i]).collect();
            let train = problem.select_rows(&train_idx);
            let test = problem.select_rows(val);
            let (tp, tr) = Transform::apply(&train, prep);
            Split { test, tr, tp }
        })
        .collect()
}

fn sse(test: &RegressionProblem, h: &CoefficientVector) -> f64 {
    test.rss(h.values())
}

/// K-fold or leave-one-out tuning by prediction error
/// `PE = sum_v ||y_v - X_v h_v||^2 / (N / V)`. Ties go to the first grid point.
pub fn cross_validate(problem: &RegressionProblem, spec: &CvSpec) -> Result<CvResult> {
    let n = problem.n_samples();
    let folds = fold_assignment(n, spec.folds, spec.seed)?;
    let v = folds.len();
    if let Some(g) = &spec.grid {
        if g.is_empty() {
            return Err(invalid("parameter grid is empty"));
        }
    }
    let sp = splits(problem, &folds, spec.preprocess);
    let scale = v as f64 / n as f64;
    match spec.estimator {
        CvEstimator::Ridge => {
            let grid = spec.grid.clone().unwrap_or_else(|| ridge_grid(n, spec.grid_points));
            let mut per_fold = vec![vec![0.0; grid.len()]; v];
            for (f, s) in sp.iter().enumerate() {
                let path = RidgePath::new(s.tp.x.view(), s.tp.y.view());
                for (g, &d) in grid.iter().enumerate() {
                    let h = s.tr.restore(&problem.catalog, &path.solve(d))?;
                    per_fold[f][g] = sse(&s.test, &h);
                }
            }
            Ok(finish("ridge", grid, per_fold, scale, None))
        }
        CvEstimator::Lasso => {
            let weights: Vec<Vec<f64>> = sp.iter().map(|_| vec![1.0; problem.n_features()]).collect();
            let grid = match &spec.grid {
                Some(g) => g.clone(),
                None => lambda_grid(problem, spec, None)?,
            };
            let per_fold = lasso_curves(problem, spec, &sp, &weights, &grid)?;
            Ok(finish("lasso", grid, per_fold, scale, None))
        }
        CvEstimator::Wlasso { delta } => {
            let delta = match delta {
                Some(d) => d,
                None => {
                    let ridge_spec = CvSpec {
                        estimator: CvEstimator::Ridge,
                        grid: None,
                        ..spec.clone()
                    };
                    cross_validate(problem, &ridge_spec)?.parameter
                }
            };
            let weights: Vec<Vec<f64>> = sp
                .iter()
                .map(|s| ridge_weights(&s.tp, delta, spec.solver.weight_cap))
                .collect::<Result<_>>()?;
            let grid = match &spec.grid {
                Some(g) => g.clone(),
                None => lambda_grid(problem, spec, Some(delta))?,
            };
            let per_fold = lasso_curves(problem, spec, &sp, &weights, &grid)?;
            Ok(finish("wlasso", grid, per_fold, scale, Some(delta)))
        }
    }
}

fn ridge_weights(tp: &RegressionProblem, delta: f64, cap: f64) -> Result<Vec<f64>> {
    let h = RidgePath::new(tp.x.view(), tp.y.view()).solve(delta);
    let h = CoefficientVector::new(tp.catalog.clone(), h)?;
    Ok(wlasso_weights(&h, cap))
}

/// Geometric grid from `lambda_max` of the full (preprocessed) data down to
/// `1e-3 lambda_max`.
fn lambda_grid(problem: &RegressionProblem, spec: &CvSpec, delta: Option<f64>) -> Result<Vec<f64>> {
    let (tp, _) = Transform::apply(problem, spec.preprocess);
    let w = match delta {
        None => vec![1.0; problem.n_features()],
        Some(d) => ridge_weights(&tp, d, spec.solver.weight_cap)?,
    };
    let xty = tp.x.t().dot(&tp.y);
    let lmax = xty
        .iter()
        .zip(&w)
        .filter(|(_, w)| **w > 0.0)
        .map(|(c, w)| c.abs() / w)
        .fold(0.0, f64::max);
    if lmax == 0.0 {
        return Ok(vec![0.0]);
    }
    Ok(geometric_grid(lmax, 1e-3, spec.grid_points))
}

fn lasso_curves(
    problem: &RegressionProblem,
    spec: &CvSpec,
    sp: &[Split],
    weights: &[Vec<f64>],
    grid: &[f64],
) -> Result<Vec<Vec<f64>>> {
    // Solve from the largest lambda down with warm starts.
    let mut order: Vec<usize> = (0..grid.len()).collect();
    order.sort_by(|&a, &b| grid[b].total_cmp(&grid[a]));
    let mut per_fold = vec![vec![0.0; grid.len()]; sp.len()];
    for (f, s) in sp.iter().enumerate() {
        let engine = LassoEngine::new(s.tp.x.view(), s.tp.y.view(), spec.solver.mode)?;
        let mut warm: Option<Array1<f64>> = None;
        for &g in &order {
            let cfg = EstimatorConfig {
                lambda: grid[g],
                weights: Weights::Uniform,
                ..spec.solver.clone()
            };
            let sol = engine.solve(&cfg, &weights[f], warm.as_ref())?;
            let h = s.tr.restore(&problem.catalog, &sol.h)?;
            per_fold[f][g] = sse(&s.test, &h);
            warm = Some(sol.h);
        }
    }
    Ok(per_fold)
}

fn finish(name: &str, grid: Vec<f64>, per_fold: Vec<Vec<f64>>, scale: f64, ridge_delta: Option<f64>) -> CvResult {
    let v = per_fold.len();
    let pe_curve: Vec<f64> = (0..grid.len())
        .map(|g| per_fold.iter().map(|f| f[g]).sum::<f64>() * scale)
        .collect();
    let mut best = 0;
    for (g, pe) in pe_curve.iter().enumerate() {
        if *pe < pe_curve[best] {
            best = g;
        }
    }
    let contrib = Array1::from_iter(per_fold.iter().map(|f| f[best] * scale * v as f64));
    let fold_sd = if v > 1 { contrib.std_axis(Axis(0), 1.0).into_scalar() } else { 0.0 };
    CvResult {
        estimator: name.to_string(),
        parameter: grid[best],
        pe: pe_curve[best],
        grid,
        pe_curve,
        fold_sd,
        ridge_delta,
        folds: v,
    }
}
