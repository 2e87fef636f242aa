//! Restricted-isometry laboratory: orthonormalized (modified) second-order
//! design matrices, the coefficient bijection back to the ordinary Volterra
//! parameterization, Gershgorin certificates, exact RIP on small instances,
//! closed-form Lasso error bounds and Monte Carlo recovery probes.

use std::io::Write;
use std::sync::Arc;

use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::estimators::{CcdMode, EstimatorConfig, LassoEngine};
use crate::linalg::{gram, symmetric_extremes};
use crate::polymodel::{enumerate_basis, lag_window, BasisCatalog, CoefficientVector, ModelKind};
use crate::synth::{draw_matrix, draw_sequence, rng_for, InputKind};

/// Column scalings of the modified second-order matrix, for `N` rows:
/// constant, linear, quadratic (applied to `x^2 - 1/3`) and bilinear.
pub fn modified_scalings(n: usize) -> [f64; 4] {
    let n = n as f64;
    [
        1.0 / n.sqrt(),
        (3.0 / n).sqrt(),
        1.5 * (5.0 / n).sqrt(),
        3.0 / n.sqrt(),
    ]
}

/// Number of second-order coefficients for `L` variables.
pub fn second_order_dim(l: usize) -> usize {
    (l + 1) * (l + 2) / 2
}

/// Catalog position of each modified column. Modified columns are ordered
/// `[1 | x_k | x_k^2 | x_i x_j (i<j, lexicographic)]`, while the catalog
/// interleaves squares and cross terms within degree 2.
pub fn modified_to_catalog(catalog: &BasisCatalog) -> Result<Vec<usize>> {
    let l = catalog.vars();
    if catalog.order() != 2 || !catalog.kind().allows_repeats() {
        return Err(Error::CatalogMismatch(format!(
            "modified parameterization needs a second-order {} or {} catalog, got {} with P={}",
            ModelKind::Volterra,
            ModelKind::PolynomialIid,
            catalog.kind(),
            catalog.order()
        )));
    }
    let mut out = Vec::with_capacity(second_order_dim(l));
    out.push(catalog.intercept_position());
    for k in 0..l {
        out.push(catalog.position_of(&[k]).expect("linear key"));
    }
    for k in 0..l {
        out.push(catalog.position_of(&[k, k]).expect("square key"));
    }
    for i in 0..l {
        for j in (i + 1)..l {
            out.push(catalog.position_of(&[i, j]).expect("pair key"));
        }
    }
    Ok(out)
}

/// Fills one modified row (unscaled basis values `psi`) from a window `x`.
fn lq_psi(x: &[f64], out: &mut [f64]) {
    let l = x.len();
    let c_l = 3f64.sqrt();
    let c_q = 1.5 * 5f64.sqrt();
    out[0] = 1.0;
    for k in 0..l {
        out[1 + k] = c_l * x[k];
        out[1 + l + k] = c_q * (x[k] * x[k] - 1.0 / 3.0);
    }
    let mut p = 1 + 2 * l;
    for i in 0..l {
        for j in (i + 1)..l {
            out[p] = 3.0 * x[i] * x[j];
            p += 1;
        }
    }
}

/// Modified (orthonormalized) second-order Volterra matrix.
#[derive(Debug, Clone)]
pub struct ModifiedMatrix {
    pub l: usize,
    /// `N x M`, columns `[c | linear | quadratic | bilinear]`.
    pub matrix: Array2<f64>,
}

impl ModifiedMatrix {
    pub fn n_rows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn constant(&self) -> ArrayView1<'_, f64> {
        self.matrix.column(0)
    }
    pub fn linear(&self) -> ArrayView2<'_, f64> {
        self.matrix.slice(s![.., 1..1 + self.l])
    }
    pub fn quadratic(&self) -> ArrayView2<'_, f64> {
        self.matrix.slice(s![.., 1 + self.l..1 + 2 * self.l])
    }
    pub fn bilinear(&self) -> ArrayView2<'_, f64> {
        self.matrix.slice(s![.., 1 + 2 * self.l..])
    }

    /// `R~ = X~^T X~`.
    pub fn grammian(&self) -> Array2<f64> {
        gram(self.matrix.view())
    }
}

/// Builds the modified matrix from the first `N + L - 1` samples of `seq`;
/// row `n` uses the window `x(n), ..., x(n-L+1)`.
pub fn build_modified_volterra(seq: &[f64], l: usize, n: usize) -> Result<ModifiedMatrix> {
    if l == 0 || n == 0 {
        return Err(invalid("need L >= 1 and N >= 1"));
    }
    let needed = n + l - 1;
    if seq.len() < needed {
        return Err(Error::InsufficientSamples {
            needed,
            available: seq.len(),
        });
    }
    let inv = 1.0 / (n as f64).sqrt();
    let m = second_order_dim(l);
    let mut matrix = Array2::zeros((n, m));
    let mut w = vec![0.0; l];
    for (t, mut row) in matrix.rows_mut().into_iter().enumerate() {
        lag_window(seq, t + l - 1, &mut w);
        let r = row.as_slice_mut().expect("row-major");
        lq_psi(&w, r);
        r.iter_mut().for_each(|v| *v *= inv);
    }
    Ok(ModifiedMatrix { l, matrix })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MapDirection {
    /// Modified-order `h~` to catalog-order `h`.
    ToOriginal,
    /// Catalog-order `h` to modified-order `h~`.
    ToModified,
}

/// Coefficient bijection between the modified and ordinary second-order
/// parameterizations (so that `X h = X~ h~` row by row).
pub fn map_coefficients(
    values: ArrayView1<f64>,
    catalog: &BasisCatalog,
    n: usize,
    direction: MapDirection,
) -> Result<Array1<f64>> {
    if n == 0 {
        return Err(invalid("N must be positive"));
    }
    let perm = modified_to_catalog(catalog)?;
    if values.len() != perm.len() {
        return Err(Error::DimensionMismatch {
            expected: perm.len(),
            got: values.len(),
        });
    }
    let l = catalog.vars();
    let [sc, sl, sq, sb] = modified_scalings(n);
    let half_sqrt5n = 0.5 * (5.0 / n as f64).sqrt();
    let scale = |j: usize| {
        if j == 0 {
            sc
        } else if j <= l {
            sl
        } else if j <= 2 * l {
            sq
        } else {
            sb
        }
    };
    let mut out = Array1::zeros(perm.len());
    match direction {
        MapDirection::ToOriginal => {
            for (j, &pos) in perm.iter().enumerate() {
                out[pos] = scale(j) * values[j];
            }
            let quad_sum: f64 = (1 + l..=2 * l).map(|j| values[j]).sum();
            out[perm[0]] -= half_sqrt5n * quad_sum;
        }
        MapDirection::ToModified => {
            for (j, &pos) in perm.iter().enumerate() {
                out[j] = values[pos] / scale(j);
            }
            let quad_sum: f64 = (1 + l..=2 * l).map(|j| out[j]).sum();
            out[0] = (values[perm[0]] + half_sqrt5n * quad_sum) / sc;
        }
    }
    Ok(out)
}

/// `h~ -> h` as a catalog coefficient vector.
pub fn to_original(h_tilde: ArrayView1<f64>, catalog: Arc<BasisCatalog>, n: usize) -> Result<CoefficientVector> {
    let h = map_coefficients(h_tilde, &catalog, n, MapDirection::ToOriginal)?;
    CoefficientVector::new(catalog, h)
}

/// `h -> h~` in modified column order.
pub fn to_modified(h: &CoefficientVector, n: usize) -> Result<Array1<f64>> {
    map_coefficients(h.values().view(), h.catalog(), n, MapDirection::ToModified)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BasisKind {
    /// `{1, sqrt(3) x_i, (3 sqrt(5)/2)(x_i^2 - 1/3), 3 x_i x_j}`, uniform inputs.
    LinearQuadratic,
    /// `(3/2)^{p/2} x_{i_1} ... x_{i_p}` over distinct indices, ternary inputs.
    MultilinearTernary,
}

/// Bounded orthonormal system with its sup-norm constant `K`.
#[derive(Debug, Clone)]
pub struct BoundedBasis {
    pub kind: BasisKind,
    pub l: usize,
    pub p: usize,
    pub k: f64,
    catalog: Option<Arc<BasisCatalog>>,
}

pub fn bounded_basis(kind: BasisKind, l: usize, p: usize) -> Result<BoundedBasis> {
    if l == 0 {
        return Err(invalid("L must be positive"));
    }
    match kind {
        BasisKind::LinearQuadratic => {
            if p != 2 {
                return Err(invalid("linear-quadratic basis is defined for P = 2"));
            }
            Ok(BoundedBasis {
                kind,
                l,
                p,
                k: 3.0,
                catalog: None,
            })
        }
        BasisKind::MultilinearTernary => {
            let cat = enumerate_basis(l, p, ModelKind::Multilinear)?;
            Ok(BoundedBasis {
                kind,
                l,
                p,
                k: 1.5f64.powf(p as f64 / 2.0),
                catalog: Some(Arc::new(cat)),
            })
        }
    }
}

impl BoundedBasis {
    pub fn len(&self) -> usize {
        match &self.catalog {
            None => second_order_dim(self.l),
            Some(c) => c.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Input distribution the basis is orthonormal under.
    pub fn input_kind(&self) -> InputKind {
        match self.kind {
            BasisKind::LinearQuadratic => InputKind::Uniform,
            BasisKind::MultilinearTernary => InputKind::Ternary,
        }
    }

    /// Catalog naming the columns (multilinear only).
    pub fn catalog(&self) -> Option<&Arc<BasisCatalog>> {
        self.catalog.as_ref()
    }

    /// Basis values `psi_m(x)`.
    pub fn psi(&self, x: &[f64], out: &mut [f64]) {
        match &self.catalog {
            None => lq_psi(x, out),
            Some(cat) => {
                cat.fill_row(x, out);
                let c = 1.5f64.sqrt();
                for (v, key) in out.iter_mut().zip(cat.keys()) {
                    *v *= c.powi(key.degree() as i32);
                }
            }
        }
    }

    /// Rows `psi(x(n)) / sqrt(N)` for the sample rows of `samples`.
    pub fn design(&self, samples: ArrayView2<f64>) -> Result<Array2<f64>> {
        if samples.ncols() != self.l {
            return Err(Error::DimensionMismatch {
                expected: self.l,
                got: samples.ncols(),
            });
        }
        let n = samples.nrows();
        let inv = 1.0 / (n as f64).sqrt();
        let mut out = Array2::zeros((n, self.len()));
        let mut buf = vec![0.0; self.l];
        for (src, mut row) in samples.rows().into_iter().zip(out.rows_mut()) {
            buf.iter_mut().zip(src.iter()).for_each(|(b, s)| *b = *s);
            let r = row.as_slice_mut().expect("row-major");
            self.psi(&buf, r);
            r.iter_mut().for_each(|v| *v *= inv);
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrthonormalityReport {
    /// `max_{i,j} |E^[psi_i psi_j] - delta_ij|`.
    pub max_deviation: f64,
    /// Largest `|psi_m(x)|` seen.
    pub sup_norm: f64,
    pub trials: usize,
}

/// Monte Carlo Gram of the basis under its input measure.
pub fn orthonormality_check(basis: &BoundedBasis, trials: usize, seed: u64) -> Result<OrthonormalityReport> {
    if trials < 1000 {
        return Err(invalid("orthonormality check needs at least 1000 trials"));
    }
    const CHUNK: usize = 8192;
    let m = basis.len();
    let mut rng = rng_for(seed, 0);
    let mut acc = Array2::<f64>::zeros((m, m));
    let mut sup = 0.0f64;
    let mut psi = Array2::<f64>::zeros((CHUNK, m));
    let mut done = 0;
    while done < trials {
        let c = CHUNK.min(trials - done);
        let x = draw_matrix(basis.input_kind(), c, basis.l, &mut rng);
        for (src, mut row) in x.rows().into_iter().zip(psi.rows_mut()) {
            let r = row.as_slice_mut().expect("row-major");
            basis.psi(src.as_slice().expect("row-major"), r);
            sup = r.iter().fold(sup, |a, v| a.max(v.abs()));
        }
        let block = psi.slice(s![..c, ..]);
        acc += &block.t().dot(&block);
        done += c;
    }
    acc /= trials as f64;
    let mut dev = 0.0f64;
    for i in 0..m {
        for j in 0..m {
            let target = if i == j { 1.0 } else { 0.0 };
            dev = dev.max((acc[[i, j]] - target).abs());
        }
    }
    Ok(OrthonormalityReport {
        max_deviation: dev,
        sup_norm: sup,
        trials,
    })
}

/// `delta_d + s * max_{i != j} |R_ij|` when below 1, else `None`.
pub fn gershgorin_certificate(r: ArrayView2<f64>, s: usize) -> Option<f64> {
    let (dd, off) = gershgorin_parts(r);
    let d = dd + s as f64 * off;
    (d < 1.0).then_some(d)
}

fn gershgorin_parts(r: ArrayView2<f64>) -> (f64, f64) {
    let m = r.nrows();
    let mut dd = 0.0f64;
    let mut off = 0.0f64;
    for i in 0..m {
        for j in 0..m {
            if i == j {
                dd = dd.max((r[[i, i]] - 1.0).abs());
            } else {
                off = off.max(r[[i, j]].abs());
            }
        }
    }
    (dd, off)
}

/// Gershgorin bounds for `s = 1..=s_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RipCertificate {
    pub delta_d: f64,
    /// Largest off-diagonal magnitude; `delta_o = s * max_offdiag`.
    pub max_offdiag: f64,
    /// Largest `s` that still certifies (0 if none).
    pub s_max: usize,
    pub certified: Vec<(usize, Option<f64>)>,
}

impl RipCertificate {
    pub fn from_grammian(r: ArrayView2<f64>, s_query: usize) -> Self {
        let (dd, off) = gershgorin_parts(r);
        let certified = (1..=s_query)
            .map(|s| {
                let d = dd + s as f64 * off;
                (s, (d < 1.0).then_some(d))
            })
            .collect();
        let s_max = if dd >= 1.0 {
            0
        } else if off == 0.0 {
            r.nrows()
        } else {
            // largest s with dd + s off < 1
            let s = ((1.0 - dd) / off).ceil() as usize;
            s.saturating_sub(1).min(r.nrows())
        };
        RipCertificate {
            delta_d: dd,
            max_offdiag: off,
            s_max,
            certified,
        }
    }
}

/// Upper bound on enumerated subsets in [`brute_force_rip`].
pub const MAX_RIP_SUBSETS: u128 = 1_000_000;

fn binom(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Exact `delta_s`: worst eigenvalue deviation from 1 over all `s`-column
/// Gram submatrices.
pub fn brute_force_rip(x: ArrayView2<f64>, s: usize) -> Result<f64> {
    let m = x.ncols();
    if s == 0 || s > m {
        return Err(invalid(format!("need 1 <= s <= M = {m}, got {s}")));
    }
    let count = binom(m, s);
    if count > MAX_RIP_SUBSETS {
        return Err(Error::TooManySubsets {
            subsets: count,
            limit: MAX_RIP_SUBSETS,
        });
    }
    let g = gram(x);
    let mut idx: Vec<usize> = (0..s).collect();
    let mut worst = 0.0f64;
    let mut sub = Array2::zeros((s, s));
    loop {
        let (lo, hi) = match s {
            1 => {
                let v = g[[idx[0], idx[0]]];
                (v, v)
            }
            2 => {
                let (a, b, c) = (g[[idx[0], idx[0]]], g[[idx[1], idx[1]]], g[[idx[0], idx[1]]]);
                let mid = 0.5 * (a + b);
                let rad = (0.25 * (a - b) * (a - b) + c * c).sqrt();
                (mid - rad, mid + rad)
            }
            _ => {
                for (p, &i) in idx.iter().enumerate() {
                    for (q, &j) in idx.iter().enumerate() {
                        sub[[p, q]] = g[[i, j]];
                    }
                }
                symmetric_extremes(sub.view())
            }
        };
        worst = worst.max((hi - 1.0).abs()).max((1.0 - lo).abs());
        // next combination
        let mut i = s;
        loop {
            if i == 0 {
                return Ok(worst);
            }
            i -= 1;
            if idx[i] < m - s + i {
                idx[i] += 1;
                for j in (i + 1)..s {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Closed-form Lasso error bounds under an RIP assumption.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LassoRipBounds {
    pub c_l: f64,
    pub l1: f64,
    pub l2_squared: f64,
    pub prediction: f64,
    pub probability: f64,
}

/// Largest `delta_2s` for which the bounds are finite.
pub fn lasso_rip_delta_limit() -> f64 {
    1.0 / (3.0 * 2f64.sqrt() + 1.0)
}

/// Bounds for the Lasso run with `lambda = A sigma sqrt(log M)` on a design
/// with RIP constant `delta_2s`, noise level `sigma`, sparsity `s`, `M` columns.
pub fn lasso_rip_bounds(delta_2s: f64, sigma: f64, s: usize, m: usize, a: f64) -> Result<LassoRipBounds> {
    if !(a > 2.0 * 2f64.sqrt()) {
        return Err(Error::Infeasible(format!("A = {a} must exceed 2 sqrt(2)")));
    }
    if !(delta_2s >= 0.0 && delta_2s < lasso_rip_delta_limit()) {
        return Err(Error::Infeasible(format!(
            "delta_2s = {delta_2s} must lie in [0, {:.6})",
            lasso_rip_delta_limit()
        )));
    }
    if !(sigma >= 0.0) || s == 0 || m < 2 {
        return Err(invalid("need sigma >= 0, s >= 1, M >= 2"));
    }
    let t = 1.0 - 3.0 * 2f64.sqrt() * delta_2s / (1.0 - delta_2s);
    let c_l = (1.0 - delta_2s) * t * t;
    let lm = (m as f64).ln();
    let s = s as f64;
    let l1 = 16.0 * a / c_l * sigma * s * lm.sqrt();
    let l2_squared = (16.0 * a / c_l).powi(2) * sigma * sigma * s * lm;
    let prediction = 16.0 * a * a / c_l * sigma * sigma * s * lm;
    let probability = 1.0 - (m as f64).powf(1.0 - a * a / 8.0);
    Ok(LassoRipBounds {
        c_l,
        l1,
        l2_squared,
        prediction,
        probability,
    })
}

/// Constant in the Toeplitz second-order sample bound.
pub const TOEPLITZ_RIP_C: f64 = 2835.0;

/// Sufficient sample size and success probability for RIP of the modified
/// second-order Volterra matrix with uniform inputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VolterraRipBound {
    /// `5 C s^2 log L / ((1 - gamma) delta^2)`, at least 160.
    pub n_min: f64,
    /// `1 - exp(-gamma delta^2 N / (C s^2))` evaluated at `n`.
    pub probability: f64,
    pub n: f64,
}

pub fn volterra_rip_bound(l: usize, s: usize, delta: f64, gamma: f64, n: Option<usize>) -> Result<VolterraRipBound> {
    if l < 7 {
        return Err(Error::Infeasible("bound requires L >= 7".into()));
    }
    if s < 2 {
        return Err(Error::Infeasible("bound requires s >= 2".into()));
    }
    if !(delta > 0.0 && delta < 1.0) || !(gamma > 0.0 && gamma < 1.0) {
        return Err(invalid("delta and gamma must lie in (0, 1)"));
    }
    let s2 = (s * s) as f64;
    let n_min = (5.0 * TOEPLITZ_RIP_C / ((1.0 - gamma) * delta * delta) * s2 * (l as f64).ln()).max(160.0);
    let n_eval = n.map(|v| v as f64).unwrap_or(n_min);
    let probability = if n_eval >= n_min {
        1.0 - (-gamma * delta * delta / TOEPLITZ_RIP_C * n_eval / s2).exp()
    } else {
        0.0
    };
    Ok(VolterraRipBound {
        n_min,
        probability,
        n: n_eval,
    })
}

/// Shape `K^2 s log^4(M)` of the bounded-orthonormal-system sample bound; the
/// universal constants in front are not known numerically.
pub fn bos_sample_shape(basis: &BoundedBasis, s: usize) -> f64 {
    basis.k * basis.k * s as f64 * (basis.len() as f64).ln().powi(4)
}

/// Monte Carlo averages of the modified Grammian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    /// `|mean_i E^[R_ii] - 1|`.
    pub mean_diag_deviation: f64,
    /// `max_i |E^[R_ii] - 1|`.
    pub max_diag_deviation: f64,
    /// `max_{i != j} |E^[R_ij]|`.
    pub max_offdiag: f64,
    pub realizations: usize,
}

/// Averages `R~` over independent uniform input realizations.
pub fn modified_moments(l: usize, n: usize, realizations: usize, seed: u64) -> Result<MomentReport> {
    if realizations == 0 {
        return Err(invalid("need at least one realization"));
    }
    let m = second_order_dim(l);
    let mut acc = Array2::<f64>::zeros((m, m));
    for r in 0..realizations {
        let mut rng = rng_for(seed, r as u64);
        let seq = draw_sequence(InputKind::Uniform, n + l - 1, &mut rng);
        acc += &build_modified_volterra(&seq, l, n)?.grammian();
    }
    acc /= realizations as f64;
    let diag = acc.diag();
    let mean_diag_deviation = (diag.mean().expect("non-empty") - 1.0).abs();
    let max_diag_deviation = diag.iter().fold(0.0f64, |a, v| a.max((v - 1.0).abs()));
    let (_, max_offdiag) = gershgorin_parts(acc.view());
    Ok(MomentReport {
        mean_diag_deviation,
        max_diag_deviation,
        max_offdiag,
        realizations,
    })
}

/// Random design used by a recovery probe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProbeKind {
    /// Modified Toeplitz matrix from one uniform sequence.
    VolterraUniform,
    /// Linear-quadratic basis on i.i.d. uniform vectors.
    LqIid,
    /// Multilinear P = 2 basis on i.i.d. ternary vectors.
    MultilinearTernary,
}

impl std::str::FromStr for ProbeKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "volterra-uniform" | "volterra" => Ok(ProbeKind::VolterraUniform),
            "lq-iid" | "lq" => Ok(ProbeKind::LqIid),
            "multilinear-ternary" | "multilinear" => Ok(ProbeKind::MultilinearTernary),
            _ => Err(invalid(format!("unknown probe kind {s:?}"))),
        }
    }
}

impl ProbeKind {
    pub fn dim(&self, l: usize) -> usize {
        match self {
            ProbeKind::VolterraUniform | ProbeKind::LqIid => second_order_dim(l),
            ProbeKind::MultilinearTernary => 1 + l + l * (l.saturating_sub(1)) / 2,
        }
    }

    /// One `N x M` realization.
    pub fn design<R: Rng + ?Sized>(&self, l: usize, n: usize, rng: &mut R) -> Result<Array2<f64>> {
        match self {
            ProbeKind::VolterraUniform => {
                let seq = draw_sequence(InputKind::Uniform, n + l - 1, rng);
                Ok(build_modified_volterra(&seq, l, n)?.matrix)
            }
            ProbeKind::LqIid => {
                let b = bounded_basis(BasisKind::LinearQuadratic, l, 2)?;
                b.design(draw_matrix(InputKind::Uniform, n, l, rng).view())
            }
            ProbeKind::MultilinearTernary => {
                let b = bounded_basis(BasisKind::MultilinearTernary, l, 2)?;
                b.design(draw_matrix(InputKind::Ternary, n, l, rng).view())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecoveryPoint {
    pub n: usize,
    pub s: usize,
    pub successes: usize,
    pub trials: usize,
    pub probability: f64,
}

impl RecoveryPoint {
    /// Binomial standard error of `probability`.
    pub fn std_err(&self) -> f64 {
        let p = self.probability;
        (p * (1.0 - p) / self.trials as f64).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryCurve {
    pub kind: ProbeKind,
    pub l: usize,
    pub m: usize,
    pub seed: u64,
    pub trials: usize,
    pub points: Vec<RecoveryPoint>,
}

impl RecoveryCurve {
    pub fn point(&self, n: usize, s: usize) -> Option<&RecoveryPoint> {
        self.points.iter().find(|p| p.n == n && p.s == s)
    }

    /// Smallest grid `N` with success probability at least `level` for `s`.
    pub fn n_at(&self, s: usize, level: f64) -> Option<usize> {
        self.points
            .iter()
            .filter(|p| p.s == s && p.probability >= level)
            .map(|p| p.n)
            .min()
    }

    /// CSV with header `kind,L,M,n,s,successes,trials,probability`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["kind", "L", "M", "n", "s", "successes", "trials", "probability"])?;
        let kind = serde_json::to_value(self.kind)?;
        let kind = kind.as_str().unwrap_or_default().to_string();
        for p in &self.points {
            w.write_record([
                kind.clone(),
                self.l.to_string(),
                self.m.to_string(),
                p.n.to_string(),
                p.s.to_string(),
                p.successes.to_string(),
                p.trials.to_string(),
                p.probability.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Relative size of the final Lasso penalty in recovery probes.
pub const PROBE_LAMBDA_RATIO: f64 = 1e-6;
/// Largest coefficient error counted as exact recovery.
pub const PROBE_L2_TOL: f64 = 1e-4;

/// Plants a random `s`-sparse `h~` (unit magnitudes, random signs), draws a
/// design, solves a near-noiseless Lasso and reports whether the support and
/// coefficients were recovered.
pub fn recovery_trial<R: Rng + ?Sized>(kind: ProbeKind, l: usize, s: usize, n: usize, rng: &mut R) -> Result<bool> {
    let m = kind.dim(l);
    if s == 0 || s >= m {
        return Err(invalid(format!("need 1 <= s < M = {m}")));
    }
    let support = {
        let mut v = sample(rng, m, s).into_vec();
        v.sort_unstable();
        v
    };
    let mut h = Array1::<f64>::zeros(m);
    for &i in &support {
        h[i] = if rng.random::<bool>() { 1.0 } else { -1.0 };
    }
    let x = kind.design(l, n, rng)?;
    let y = x.dot(&h);
    let h_hat = near_noiseless_lasso(x.view(), y.view())?;
    let err = (&h_hat - &h).mapv(|v| v * v).sum().sqrt();
    let found: Vec<usize> = (0..m).filter(|&i| h_hat[i] != 0.0).collect();
    Ok(found == support && err <= PROBE_L2_TOL)
}

/// Lasso at `lambda = 1e-6 ||X^T y||_inf` reached by a warm-started
/// geometric continuation from `||X^T y||_inf`.
pub fn near_noiseless_lasso(x: ArrayView2<f64>, y: ArrayView1<f64>) -> Result<Array1<f64>> {
    let (n, m) = x.dim();
    let mode = if m <= 4 * n && m <= 1500 {
        CcdMode::Gram
    } else {
        CcdMode::Residual
    };
    let engine = LassoEngine::new(x, y, mode)?;
    let w = vec![1.0; m];
    let lmax = engine.lambda_max(&w);
    if lmax == 0.0 {
        return Ok(Array1::zeros(m));
    }
    let target = PROBE_LAMBDA_RATIO * lmax;
    let mut h: Option<Array1<f64>> = None;
    let mut lambda = 0.5 * lmax;
    loop {
        let last = lambda <= target;
        let lam = lambda.max(target);
        let cfg = EstimatorConfig {
            lambda: lam,
            tol: if last { 1e-11 } else { 1e-7 },
            max_sweeps: if last { 20_000 } else { 2_000 },
            mode,
            active_set: true,
            ..Default::default()
        };
        let sol = engine.solve(&cfg, &w, h.as_ref())?;
        h = Some(sol.h);
        if last {
            break;
        }
        lambda *= 0.4;
    }
    Ok(h.expect("at least one solve"))
}

/// Success frequency over `trials` per `(N, s)`. Trial seeds derive from
/// `(seed, s, N, trial)`, so results do not depend on scheduling.
pub fn recovery_probe(
    kind: ProbeKind,
    l: usize,
    s_values: &[usize],
    n_grid: &[usize],
    trials: usize,
    seed: u64,
) -> Result<RecoveryCurve> {
    if trials == 0 {
        return Err(invalid("trials must be at least 1"));
    }
    let m = kind.dim(l);
    let mut points = Vec::new();
    for &s in s_values {
        for &n in n_grid {
            let outcomes: Vec<Result<bool>> = (0..trials)
                .into_par_iter()
                .map(|t| {
                    let stream = ((s as u64) << 48) | ((n as u64) << 24) | t as u64;
                    let mut rng = rng_for(seed, stream);
                    recovery_trial(kind, l, s, n, &mut rng)
                })
                .collect();
            let mut successes = 0;
            for o in outcomes {
                successes += o? as usize;
            }
            points.push(RecoveryPoint {
                n,
                s,
                successes,
                trials,
                probability: successes as f64 / trials as f64,
            });
        }
    }
    Ok(RecoveryCurve {
        kind,
        l,
        m,
        seed,
        trials,
        points,
    })
}

/// Scales the columns of `x` to unit l2 norm in place.
pub fn normalize_columns(x: &mut Array2<f64>) {
    for mut c in x.axis_iter_mut(Axis(1)) {
        let norm = c.dot(&c).sqrt();
        if norm > 0.0 {
            c /= norm;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polymodel::enumerate_basis;
    use ndarray::array;

    #[test]
    fn constant_column_unit_norm() {
        let mut rng = rng_for(1, 0);
        let seq = draw_sequence(InputKind::Uniform, 60, &mut rng);
        let mm = build_modified_volterra(&seq, 5, 50).unwrap();
        assert_eq!(mm.matrix.ncols(), 21);
        let c = mm.constant();
        assert!(c.iter().all(|v| (*v - 1.0 / 50f64.sqrt()).abs() < 1e-15));
        assert!((c.dot(&c) - 1.0).abs() < 1e-12);
        assert!(build_modified_volterra(&seq, 5, 57).is_err());
    }

    #[test]
    fn quadratic_block_vanishes_on_centered_constant() {
        let seq = vec![1.0 / 3f64.sqrt(); 20];
        let mm = build_modified_volterra(&seq, 4, 17).unwrap();
        assert!(mm.quadratic().iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn linear_map_at_n3() {
        let cat = enumerate_basis(3, 2, ModelKind::Volterra).unwrap();
        let mut ht = Array1::zeros(10);
        ht[1] = 0.7;
        ht[3] = -1.2;
        let h = map_coefficients(ht.view(), &cat, 3, MapDirection::ToOriginal).unwrap();
        assert!((h[cat.position_of(&[0]).unwrap()] - 0.7).abs() < 1e-15);
        assert!((h[cat.position_of(&[2]).unwrap()] + 1.2).abs() < 1e-15);
    }

    #[test]
    fn expansion_matching_and_round_trip() {
        let l = 4;
        let n = 30;
        let cat = Arc::new(enumerate_basis(l, 2, ModelKind::Volterra).unwrap());
        let mut rng = rng_for(2, 0);
        let seq = draw_sequence(InputKind::Uniform, n + l - 1, &mut rng);
        let mm = build_modified_volterra(&seq, l, n).unwrap();
        let x = cat.build_matrix_from_sequence(&seq).unwrap();
        let ht = draw_sequence(InputKind::Gaussian, cat.len(), &mut rng);
        let ht = Array1::from(ht);
        let h = to_original(ht.view(), cat.clone(), n).unwrap();
        let d = (x.dot(h.values()) - mm.matrix.dot(&ht)).iter().fold(0.0f64, |a, v| a.max(v.abs()));
        assert!(d < 1e-12, "{d}");
        let back = to_modified(&h, n).unwrap();
        assert!((&back - &ht).iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn mapping_rejects_other_orders() {
        let cat = enumerate_basis(3, 3, ModelKind::Volterra).unwrap();
        let v = Array1::zeros(cat.len());
        assert!(map_coefficients(v.view(), &cat, 10, MapDirection::ToOriginal).is_err());
    }

    #[test]
    fn lq_row_at_zero() {
        let b = bounded_basis(BasisKind::LinearQuadratic, 3, 2).unwrap();
        let row = b.design(array![[0.0, 0.0, 0.0]].view()).unwrap();
        let expect = [1.0, 0.0, 0.0, 0.0, -5f64.sqrt() / 2.0, -5f64.sqrt() / 2.0, -5f64.sqrt() / 2.0, 0.0, 0.0, 0.0];
        for (a, b) in row.row(0).iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn basis_constants() {
        assert_eq!(bounded_basis(BasisKind::LinearQuadratic, 4, 2).unwrap().k, 3.0);
        assert!((bounded_basis(BasisKind::MultilinearTernary, 4, 2).unwrap().k - 1.5).abs() < 1e-15);
        assert!(bounded_basis(BasisKind::LinearQuadratic, 4, 3).is_err());
    }

    #[test]
    fn orthonormality_small() {
        for basis in [
            bounded_basis(BasisKind::LinearQuadratic, 3, 2).unwrap(),
            bounded_basis(BasisKind::MultilinearTernary, 4, 2).unwrap(),
        ] {
            let r = orthonormality_check(&basis, 200_000, 3).unwrap();
            assert!(r.max_deviation < 0.03, "{r:?}");
            assert!(r.sup_norm <= basis.k + 1e-12);
        }
        let b = bounded_basis(BasisKind::LinearQuadratic, 3, 2).unwrap();
        assert!(orthonormality_check(&b, 999, 0).is_err());
    }

    #[test]
    fn gershgorin_cases() {
        let eye = Array2::<f64>::eye(5);
        for s in 1..5 {
            assert_eq!(gershgorin_certificate(eye.view(), s), Some(0.0));
        }
        let mut r = Array2::from_elem((4, 4), 0.2);
        r.diag_mut().fill(1.0);
        assert!((gershgorin_certificate(r.view(), 3).unwrap() - 0.6).abs() < 1e-15);
        assert_eq!(gershgorin_certificate(r.view(), 5), None);
        let cert = RipCertificate::from_grammian(r.view(), 6);
        assert_eq!(cert.s_max, 4);
        let mut last = 0.0;
        for (_, d) in cert.certified.iter().filter_map(|(s, d)| d.map(|d| (s, d))) {
            assert!(d >= last);
            last = d;
        }
    }

    #[test]
    fn brute_force_cases() {
        let eye = Array2::<f64>::eye(6);
        assert_eq!(brute_force_rip(eye.view(), 3).unwrap(), 0.0);
        let x = array![[1.0, 1.0], [0.0, 0.0]];
        assert!((brute_force_rip(x.view(), 2).unwrap() - 1.0).abs() < 1e-15);
        let big = Array2::<f64>::zeros((2, 200));
        assert!(matches!(brute_force_rip(big.view(), 4), Err(Error::TooManySubsets { .. })));
    }

    #[test]
    fn brute_force_matches_pair_scan() {
        let mut rng = rng_for(4, 0);
        let mut x = draw_matrix(InputKind::Gaussian, 40, 10, &mut rng);
        normalize_columns(&mut x);
        let d2 = brute_force_rip(x.view(), 2).unwrap();
        let mut worst = 0.0f64;
        for i in 0..10 {
            for j in (i + 1)..10 {
                let sub = x.select(Axis(1), &[i, j]);
                let (lo, hi) = symmetric_extremes(gram(sub.view()).view());
                worst = worst.max(hi - 1.0).max(1.0 - lo);
            }
        }
        assert!((d2 - worst).abs() < 1e-12);
        let d3 = brute_force_rip(x.view(), 3).unwrap();
        assert!(d3 >= d2);
        let cert = gershgorin_certificate(gram(x.view()).view(), 2);
        if let Some(c) = cert {
            assert!(c >= d2);
        }
    }

    #[test]
    fn lasso_rip_formulas() {
        let b = lasso_rip_bounds(0.0, 0.5, 3, 100, 3.0).unwrap();
        assert_eq!(b.c_l, 1.0);
        let lm = 100f64.ln();
        assert!((b.l2_squared - 48f64.powi(2) * 0.25 * 3.0 * lm).abs() < 1e-9);
        assert!((b.probability - (1.0 - 100f64.powf(-1.0 / 8.0))).abs() < 1e-15);
        let near = lasso_rip_bounds(lasso_rip_delta_limit() - 1e-9, 0.5, 3, 100, 3.0).unwrap();
        assert!(near.c_l < 1e-6 && near.l1 > 1e6);
        assert!(lasso_rip_bounds(0.1, 0.5, 3, 100, 2.0).is_err());
        assert!(lasso_rip_bounds(0.2, 0.5, 3, 100, 3.0).is_err());
    }

    #[test]
    fn volterra_bound_formula() {
        let b = volterra_rip_bound(10, 2, 0.5, 0.5, None).unwrap();
        let expect = 5.0 * 2835.0 / (0.5 * 0.25) * 4.0 * 10f64.ln();
        assert!((b.n_min - expect).abs() < 1e-6);
        assert!(b.probability > 0.0 && b.probability < 1.0);
        assert!(volterra_rip_bound(6, 2, 0.5, 0.5, None).is_err());
        assert_eq!(volterra_rip_bound(10, 2, 0.5, 0.5, Some(100)).unwrap().probability, 0.0);
    }

    #[test]
    fn moments_shrink_like_inverse_sqrt() {
        let rms = |n: usize| {
            let mut rng = rng_for(5, n as u64);
            let seq = draw_sequence(InputKind::Uniform, n + 4, &mut rng);
            let r = build_modified_volterra(&seq, 5, n).unwrap().grammian();
            let m = r.nrows();
            let mut acc = 0.0;
            for i in 0..m {
                for j in 0..m {
                    let t = if i == j { 1.0 } else { 0.0 };
                    acc += (r[[i, j]] - t).powi(2);
                }
            }
            (acc / (m * m) as f64).sqrt()
        };
        let ratio = rms(1000) / rms(4000);
        assert!(ratio > 1.0 && ratio < 4.0, "ratio {ratio}");
    }

    #[test]
    fn overdetermined_probe_succeeds() {
        let c = recovery_probe(ProbeKind::LqIid, 4, &[2], &[60], 10, 6).unwrap();
        assert_eq!(c.points[0].probability, 1.0);
        let mut buf = Vec::new();
        c.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("kind,L,M,n,s"));
        assert!(text.contains("lq-iid,4,15,60,2,10,10,1"));
    }

    #[test]
    fn probe_is_reproducible() {
        let a = recovery_probe(ProbeKind::MultilinearTernary, 6, &[3], &[15], 8, 7).unwrap();
        let b = recovery_probe(ProbeKind::MultilinearTernary, 6, &[3], &[15], 8, 7).unwrap();
        assert_eq!(a, b);
    }
}
