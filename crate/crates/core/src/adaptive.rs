//! Online estimation: exponentially weighted RLS and the recursive
//! (weighted) Lasso that runs one coordinate sweep per sample.

use std::collections::VecDeque;
use std::io::Write;
use std::sync::Arc;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::estimators::{inverse_weight, DEFAULT_WEIGHT_CAP};
use crate::linalg::Cholesky;
use crate::polymodel::{BasisCatalog, ModelKind};

/// Per-coordinate weights for the recursive Lasso sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightRule {
    /// `w = 1` (recursive Lasso).
    A1,
    /// `w_i = min(1 / |h_rls_i|, cap)`, refreshed every step (recursive weighted Lasso).
    A2,
}

/// `lambda_N` as a function of the sample count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", content = "scale", rename_all = "lowercase")]
pub enum LambdaSchedule {
    Constant(f64),
    /// `scale * sqrt(N)`.
    Sqrt(f64),
    /// `scale * ln(N)`.
    Log(f64),
}

impl LambdaSchedule {
    pub const RL_DEFAULT: LambdaSchedule = LambdaSchedule::Sqrt(0.7);
    pub const RWL_DEFAULT: LambdaSchedule = LambdaSchedule::Log(0.08);

    pub fn at(&self, n: usize) -> f64 {
        let n = n as f64;
        match *self {
            LambdaSchedule::Constant(c) => c,
            LambdaSchedule::Sqrt(c) => c * n.sqrt(),
            LambdaSchedule::Log(c) => c * n.max(1.0).ln(),
        }
    }
}

/// Running Grammian `R_N`, correlation `z_N = b_N - R_N h`, the sparse
/// estimate `h`, and optionally the RLS estimate `h_rls = R_N^{-1} b_N`.
#[derive(Debug, Clone)]
pub struct AdaptiveState {
    r: Array2<f64>,
    z: Array1<f64>,
    h: Array1<f64>,
    beta: f64,
    delta: f64,
    n: usize,
    weight_cap: f64,
    rls: Option<RlsTrack>,
    ops: u64,
}

#[derive(Debug, Clone)]
struct RlsTrack {
    chol: Cholesky,
    b: Array1<f64>,
    h: Array1<f64>,
}

/// `h = 0`, `z = 0`, `R = delta I`; RLS tracking on.
pub fn adaptive_init(m: usize, delta: f64, beta: f64) -> Result<AdaptiveState> {
    AdaptiveState::new(m, delta, beta, true)
}

impl AdaptiveState {
    pub fn new(m: usize, delta: f64, beta: f64, track_rls: bool) -> Result<Self> {
        if m == 0 {
            return Err(invalid("adaptive state needs at least one coefficient"));
        }
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(invalid("delta must be positive"));
        }
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(invalid(format!("forgetting factor must lie in (0, 1], got {beta}")));
        }
        let mut r = Array2::zeros((m, m));
        r.diag_mut().fill(delta);
        let rls = track_rls.then(|| RlsTrack {
            chol: Cholesky::scaled_identity(m, delta),
            b: Array1::zeros(m),
            h: Array1::zeros(m),
        });
        Ok(AdaptiveState {
            r,
            z: Array1::zeros(m),
            h: Array1::zeros(m),
            beta,
            delta,
            n: 0,
            weight_cap: DEFAULT_WEIGHT_CAP,
            rls,
            ops: 0,
        })
    }

    pub fn with_weight_cap(mut self, cap: f64) -> Result<Self> {
        if !(cap > 0.0) {
            return Err(invalid("weight cap must be positive"));
        }
        self.weight_cap = cap;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.h.len()
    }
    pub fn samples(&self) -> usize {
        self.n
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
    pub fn delta(&self) -> f64 {
        self.delta
    }
    pub fn grammian(&self) -> &Array2<f64> {
        &self.r
    }
    pub fn correlation(&self) -> &Array1<f64> {
        &self.z
    }
    pub fn estimate(&self) -> &Array1<f64> {
        &self.h
    }
    pub fn rls_estimate(&self) -> Option<&Array1<f64>> {
        self.rls.as_ref().map(|t| &t.h)
    }

    /// Multiply-add count accumulated by steps so far.
    pub fn op_count(&self) -> u64 {
        self.ops
    }

    fn check_row(&self, x: ArrayView1<f64>, y: f64) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        if !y.is_finite() || x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Data("non-finite sample".into()));
        }
        Ok(())
    }

    /// `R <- beta R + x x^T`, `z <- beta z + x (y - x^T h)`, and the RLS
    /// factor / right-hand side when tracked.
    fn absorb(&mut self, x: ArrayView1<f64>, y: f64) {
        let m = self.dim();
        let beta = self.beta;
        let xs = x.to_vec();
        let e = y - xs.iter().zip(self.h.iter()).map(|(a, b)| a * b).sum::<f64>();
        let rs = self.r.as_slice_mut().expect("row-major");
        for i in 0..m {
            let xi = xs[i];
            let row = &mut rs[i * m..(i + 1) * m];
            for (rij, xj) in row.iter_mut().zip(&xs) {
                *rij = beta * *rij + xi * xj;
            }
        }
        for (zi, xi) in self.z.iter_mut().zip(&xs) {
            *zi = beta * *zi + xi * e;
        }
        self.ops += (m * m + 2 * m) as u64;
        if let Some(t) = self.rls.as_mut() {
            if beta != 1.0 {
                t.chol.scale(beta);
                self.ops += (m * m) as u64;
            }
            self.ops += t.chol.rank_one_update(x);
            for (bi, xi) in t.b.iter_mut().zip(&xs) {
                *bi = beta * *bi + xi * y;
            }
            t.h = t.chol.solve(t.b.view());
            self.ops += (m * m + m) as u64;
        }
        self.n += 1;
    }

    /// Absorbs one sample and returns the updated RLS estimate.
    pub fn rls_step(&mut self, x: ArrayView1<f64>, y: f64) -> Result<&Array1<f64>> {
        if self.rls.is_none() {
            return Err(invalid("RLS tracking is disabled for this state"));
        }
        self.check_row(x, y)?;
        self.absorb(x, y);
        Ok(&self.rls.as_ref().expect("tracked").h)
    }

    /// Absorbs one sample, then performs one cyclic sweep with `lambda`
    /// and the chosen weights.
    pub fn ccd_rwl_step(&mut self, x: ArrayView1<f64>, y: f64, lambda: f64, rule: WeightRule) -> Result<&Array1<f64>> {
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(invalid("lambda must be finite and non-negative"));
        }
        if rule == WeightRule::A2 && self.rls.is_none() {
            return Err(invalid("weight rule a2 needs RLS tracking"));
        }
        self.check_row(x, y)?;
        self.absorb(x, y);
        let weights = self.weights(rule);
        self.sweep(lambda, &weights);
        Ok(&self.h)
    }

    /// Weights used by `rule` at the current step.
    pub fn weights(&self, rule: WeightRule) -> Vec<f64> {
        match rule {
            WeightRule::A1 => vec![1.0; self.dim()],
            WeightRule::A2 => match &self.rls {
                Some(t) => t.h.iter().map(|v| inverse_weight(*v, self.weight_cap)).collect(),
                None => vec![self.weight_cap; self.dim()],
            },
        }
    }

    fn sweep(&mut self, lambda: f64, w: &[f64]) {
        self.ops += sweep(&self.r, &mut self.z, &mut self.h, lambda, w);
    }

    /// Largest subgradient violation of the current instantaneous objective
    /// `1/2 h^T R_N h - b_N^T h + lambda sum w_i |h_i|`.
    pub fn kkt_gap(&self, lambda: f64, weights: &[f64]) -> f64 {
        self.h
            .iter()
            .zip(self.z.iter())
            .zip(weights)
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
}

/// One cyclic pass `i = 0..M`: lift `z_i`, soft-threshold, restore `z`.
/// Returns the multiply-add count.
fn sweep(r: &Array2<f64>, z: &mut Array1<f64>, h: &mut Array1<f64>, lambda: f64, w: &[f64]) -> u64 {
    let m = h.len();
    let rs = r.as_slice().expect("row-major");
    let zs = z.as_slice_mut().expect("contiguous");
    let mut ops = 0u64;
    for i in 0..m {
        let row = &rs[i * m..(i + 1) * m];
        let rii = row[i];
        let old = h[i];
        let zi = zs[i] + rii * old;
        let a = zi.abs() - lambda * w[i];
        let new = if a > 0.0 { a.copysign(zi) / rii } else { 0.0 };
        let d = new - old;
        if d != 0.0 {
            for (zj, rj) in zs.iter_mut().zip(row) {
                *zj -= rj * d;
            }
            h[i] = new;
            ops += m as u64;
        }
        ops += 1;
    }
    ops
}

/// Several recursive Lasso variants sharing one Grammian and one RLS
/// factor; each keeps its own `z` and `h`. Equivalent to running separate
/// [`AdaptiveState`]s with `beta` and `delta` in common.
#[derive(Debug, Clone)]
pub struct AdaptiveBank {
    state: AdaptiveState,
    algorithms: Vec<AdaptiveAlgorithm>,
    z: Vec<Array1<f64>>,
    h: Vec<Array1<f64>>,
}

impl AdaptiveBank {
    pub fn new(m: usize, delta: f64, beta: f64, algorithms: &[AdaptiveAlgorithm]) -> Result<Self> {
        Ok(AdaptiveBank {
            state: AdaptiveState::new(m, delta, beta, true)?,
            algorithms: algorithms.to_vec(),
            z: vec![Array1::zeros(m); algorithms.len()],
            h: vec![Array1::zeros(m); algorithms.len()],
        })
    }

    pub fn algorithms(&self) -> &[AdaptiveAlgorithm] {
        &self.algorithms
    }

    pub fn samples(&self) -> usize {
        self.state.n
    }

    /// Feeds one sample to every algorithm.
    pub fn step(&mut self, x: ArrayView1<f64>, y: f64) -> Result<()> {
        self.state.check_row(x, y)?;
        let st = &mut self.state;
        // Shared Grammian and RLS update; the inner state's own `h` is never swept.
        st.absorb(x, y);
        let n = st.n;
        let beta = st.beta;
        let weights_a2 = st.weights(WeightRule::A2);
        for (k, alg) in self.algorithms.iter().enumerate() {
            let (rule, lambda) = match *alg {
                AdaptiveAlgorithm::Rls => continue,
                AdaptiveAlgorithm::CcdRl { schedule } => (WeightRule::A1, schedule.at(n)),
                AdaptiveAlgorithm::CcdRwl { schedule } => (WeightRule::A2, schedule.at(n)),
            };
            let h = &mut self.h[k];
            let e = y - x.dot(h);
            for (zi, xi) in self.z[k].iter_mut().zip(x.iter()) {
                *zi = beta * *zi + xi * e;
            }
            let ones;
            let w: &[f64] = match rule {
                WeightRule::A1 => {
                    ones = vec![1.0; h.len()];
                    &ones
                }
                WeightRule::A2 => &weights_a2,
            };
            st.ops += sweep(&st.r, &mut self.z[k], h, lambda, w);
        }
        Ok(())
    }

    /// Current estimate of algorithm `k`.
    pub fn estimate(&self, k: usize) -> &Array1<f64> {
        match self.algorithms[k] {
            AdaptiveAlgorithm::Rls => &self.state.rls.as_ref().expect("tracked").h,
            _ => &self.h[k],
        }
    }
}

/// Sliding lag window over a scalar stream, producing Volterra regressor rows.
#[derive(Debug, Clone)]
pub struct VolterraStream {
    catalog: Arc<BasisCatalog>,
    window: VecDeque<f64>,
    buf: Vec<f64>,
}

impl VolterraStream {
    pub fn new(catalog: Arc<BasisCatalog>) -> Result<Self> {
        if catalog.kind() != ModelKind::Volterra {
            return Err(invalid("scalar streaming needs a volterra catalog"));
        }
        let l = catalog.vars();
        Ok(VolterraStream {
            catalog,
            window: VecDeque::with_capacity(l),
            buf: vec![0.0; l],
        })
    }

    /// Pushes `u(t)`; returns the regressor row once `L` samples are buffered.
    pub fn push(&mut self, u: f64) -> Option<Array1<f64>> {
        let l = self.catalog.vars();
        if self.window.len() == l {
            self.window.pop_back();
        }
        self.window.push_front(u);
        if self.window.len() < l {
            return None;
        }
        for (b, w) in self.buf.iter_mut().zip(&self.window) {
            *b = *w;
        }
        let mut row = Array1::zeros(self.catalog.len());
        self.catalog.fill_row(&self.buf, row.as_slice_mut().expect("contiguous"));
        Some(row)
    }
}

/// Online algorithm run by [`track`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "kebab-case")]
pub enum AdaptiveAlgorithm {
    Rls,
    CcdRl { schedule: LambdaSchedule },
    CcdRwl { schedule: LambdaSchedule },
}

impl AdaptiveAlgorithm {
    pub fn name(&self) -> &'static str {
        match self {
            AdaptiveAlgorithm::Rls => "rls",
            AdaptiveAlgorithm::CcdRl { .. } => "ccd-rl",
            AdaptiveAlgorithm::CcdRwl { .. } => "ccd-rwl",
        }
    }

    /// Feeds one sample and returns the algorithm's current estimate.
    pub fn step<'a>(&self, state: &'a mut AdaptiveState, x: ArrayView1<f64>, y: f64) -> Result<&'a Array1<f64>> {
        match *self {
            AdaptiveAlgorithm::Rls => state.rls_step(x, y),
            AdaptiveAlgorithm::CcdRl { schedule } => {
                let lambda = schedule.at(state.samples() + 1);
                state.ccd_rwl_step(x, y, lambda, WeightRule::A1)
            }
            AdaptiveAlgorithm::CcdRwl { schedule } => {
                let lambda = schedule.at(state.samples() + 1);
                state.ccd_rwl_step(x, y, lambda, WeightRule::A2)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub n: usize,
    /// `||h_true - h_N||^2`.
    pub sq_error: f64,
}

/// Runs `alg` over the rows of `x`, recording the squared coefficient error
/// after every step.
pub fn track(
    state: &mut AdaptiveState,
    alg: AdaptiveAlgorithm,
    x: ArrayView2<f64>,
    y: ArrayView1<f64>,
    h_true: ArrayView1<f64>,
) -> Result<Vec<TrajectoryPoint>> {
    if x.nrows() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.nrows(),
            got: y.len(),
        });
    }
    if h_true.len() != state.dim() {
        return Err(Error::DimensionMismatch {
            expected: state.dim(),
            got: h_true.len(),
        });
    }
    let mut out = Vec::with_capacity(y.len());
    for (row, &yn) in x.rows().into_iter().zip(y.iter()) {
        let h = alg.step(state, row, yn)?;
        let e: f64 = h.iter().zip(h_true.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
        out.push(TrajectoryPoint {
            n: state.samples(),
            sq_error: e,
        });
    }
    Ok(out)
}

/// CSV with header `n,sq_error`.
pub fn write_trajectory_csv<W: Write>(out: W, points: &[TrajectoryPoint]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for p in points {
        w.serialize(p)?;
    }
    w.flush()?;
    Ok(())
}
