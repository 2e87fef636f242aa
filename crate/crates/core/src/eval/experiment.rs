use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use ndarray::{s, Array1, Array2};
use rand::RngCore;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::cv::{cross_validate, CvEstimator, CvSpec, Folds};
use super::data::load_genotype_csv;
use super::metrics::support_metrics;
use crate::adaptive::{AdaptiveAlgorithm, AdaptiveBank, LambdaSchedule};
use crate::error::{invalid, Result};
use crate::estimators::{fit_estimator, CcdMode, Estimator, EstimatorConfig, LassoEngine, DEFAULT_WEIGHT_CAP};
use crate::linalg::Cholesky;
use crate::polymodel::{enumerate_basis, lnl_expand, BasisCatalog, CoefficientVector, LnlSystem, ModelKind};
use crate::problem::{Preprocess, RegressionProblem};
use crate::riplab::{recovery_probe, ProbeKind};
use crate::synth::{draw_sequence, gen_qtl, rng_for, InputKind, QtlConfig, VarianceTarget};

/// Name of the generator behind every seeded stream.
pub const RNG_NAME: &str = "ChaCha20 (rand_chacha), stream-selected per (seed, index)";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Fig1Batch,
    Fig1Adaptive,
    QtlSynthetic,
    QtlReal,
    RipProbe,
}

impl Scenario {
    pub fn name(&self) -> &'static str {
        match self {
            Scenario::Fig1Batch => "fig1-batch",
            Scenario::Fig1Adaptive => "fig1-adaptive",
            Scenario::QtlSynthetic => "qtl-synthetic",
            Scenario::QtlReal => "qtl-real",
            Scenario::RipProbe => "rip-probe",
        }
    }
}

impl std::str::FromStr for Scenario {
    type Err = crate::error::Error;
    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(Value::String(s.to_string())).map_err(|_| invalid(format!("unknown scenario {s:?}")))
    }
}

/// The LNL benchmark: identical 6-tap filters around `x + 0.4 x^2 - 0.5 x^3`.
pub fn reference_lnl_system() -> LnlSystem {
    let h = vec![0.36, 0.0, 0.91, 0.0, 0.0, 0.19];
    LnlSystem::new(h.clone(), vec![0.0, 1.0, 0.4, -0.5], h).expect("valid system")
}

/// Volterra memory and order used with [`reference_lnl_system`].
pub const REFERENCE_MEMORY: usize = 11;
pub const REFERENCE_ORDER: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum QtlLayout {
    /// The shipped default scenario.
    Default,
    Random {
        individuals: usize,
        markers: usize,
        main: usize,
        epistatic: usize,
        main_scale: f64,
        epistatic_scale: f64,
        mean: f64,
        variance: VarianceTarget,
        layout_seed: u64,
    },
    Explicit { config: QtlConfig },
}

impl QtlLayout {
    pub fn resolve(&self) -> Result<QtlConfig> {
        match self {
            QtlLayout::Default => Ok(QtlConfig::default_scenario()),
            QtlLayout::Random {
                individuals,
                markers,
                main,
                epistatic,
                main_scale,
                epistatic_scale,
                mean,
                variance,
                layout_seed,
            } => QtlConfig::random_layout(
                *individuals,
                *markers,
                *main,
                *epistatic,
                *main_scale,
                *epistatic_scale,
                *mean,
                *variance,
                InputKind::Binary,
                *layout_seed,
            ),
            QtlLayout::Explicit { config } => {
                config.validate()?;
                Ok(config.clone())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvSettings {
    pub folds: Folds,
    pub grid_points: usize,
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeSettings {
    pub kinds: Vec<ProbeKind>,
    pub l: usize,
    pub s_values: Vec<usize>,
    pub trials: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub seed: u64,
    pub runs: usize,
    /// Sample sizes (or recovery-probe row counts); strictly increasing.
    pub n_grid: Vec<usize>,
    pub noise_var: f64,
    pub ridge_delta: f64,
    pub lasso_schedule: LambdaSchedule,
    pub wlasso_schedule: LambdaSchedule,
    pub weight_cap: f64,
    pub qtl: QtlLayout,
    pub cv: CvSettings,
    /// Magnitude above which a coefficient counts as a reported effect.
    pub threshold: f64,
    pub data: Option<PathBuf>,
    pub probe: ProbeSettings,
    pub out_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Defaults for each scenario.
    pub fn preset(scenario: Scenario) -> Self {
        let base = ExperimentConfig {
            scenario,
            seed: 1,
            runs: 100,
            n_grid: (1..=10).map(|k| 100 * k).collect(),
            noise_var: 0.1,
            ridge_delta: 1.0,
            lasso_schedule: LambdaSchedule::RL_DEFAULT,
            wlasso_schedule: LambdaSchedule::RWL_DEFAULT,
            weight_cap: DEFAULT_WEIGHT_CAP,
            qtl: QtlLayout::Default,
            cv: CvSettings {
                folds: Folds::K(10),
                grid_points: 100,
                tol: 1e-6,
            },
            threshold: 0.1,
            data: None,
            probe: ProbeSettings {
                kinds: vec![ProbeKind::LqIid, ProbeKind::VolterraUniform],
                l: 30,
                s_values: vec![2, 4, 8],
                trials: 100,
            },
            out_dir: None,
        };
        match scenario {
            Scenario::Fig1Batch | Scenario::Fig1Adaptive => base,
            Scenario::QtlSynthetic => ExperimentConfig {
                runs: 1,
                n_grid: vec![],
                ..base
            },
            Scenario::QtlReal => ExperimentConfig {
                runs: 1,
                n_grid: vec![],
                cv: CvSettings {
                    folds: Folds::LeaveOneOut,
                    ..base.cv.clone()
                },
                ..base
            },
            Scenario::RipProbe => ExperimentConfig {
                runs: 1,
                n_grid: (2..=20).map(|k| 10 * k).collect(),
                ..base
            },
        }
    }

    /// Parses a (possibly partial) JSON config over the preset of its
    /// `scenario` (default `fig1-batch`).
    pub fn from_json(text: &str) -> Result<Self> {
        let user: Value = serde_json::from_str(text)?;
        let scenario = match user.get("scenario") {
            Some(v) => serde_json::from_value(v.clone())?,
            None => Scenario::Fig1Batch,
        };
        let mut base = serde_json::to_value(Self::preset(scenario))?;
        merge(&mut base, user);
        let cfg: Self = serde_json::from_value(base)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(invalid("run count must be at least 1"));
        }
        if self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("N grid must be strictly increasing"));
        }
        let needs_grid = matches!(self.scenario, Scenario::Fig1Batch | Scenario::Fig1Adaptive | Scenario::RipProbe);
        if needs_grid && (self.n_grid.is_empty() || self.n_grid[0] == 0) {
            return Err(invalid("N grid must be non-empty and positive"));
        }
        if !(self.noise_var >= 0.0) || !(self.ridge_delta > 0.0) || !(self.weight_cap > 0.0) {
            return Err(invalid("noise variance, ridge delta and weight cap must be valid"));
        }
        if self.scenario == Scenario::QtlReal && self.data.is_none() {
            return Err(invalid("qtl-real needs a data path"));
        }
        if self.scenario == Scenario::RipProbe && (self.probe.kinds.is_empty() || self.probe.s_values.is_empty()) {
            return Err(invalid("probe needs at least one kind and one sparsity"));
        }
        Ok(())
    }
}

fn merge(base: &mut Value, user: Value) {
    match (base, user) {
        (Value::Object(b), Value::Object(u)) => {
            for (k, v) in u {
                match b.get_mut(&k) {
                    // Tagged layouts replace wholesale.
                    Some(slot) if k != "qtl" => merge(slot, v),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

/// One tidy output row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub scenario: String,
    pub estimator: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub run: usize,
    pub metric: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub estimator: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub metric: String,
    pub runs: usize,
    pub mean: f64,
    pub std_err: f64,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub config: ExperimentConfig,
    pub records: Vec<Record>,
    /// Scenario-specific extras (CV curves, reported effects, ...).
    pub extra: Value,
    /// Solver calls that hit the sweep limit.
    pub nonconverged: usize,
}

impl ExperimentOutput {
    /// Mean and standard error per `(estimator, N, metric)`.
    pub fn summary(&self) -> Vec<SummaryRow> {
        let mut groups: BTreeMap<(String, usize, String), Vec<f64>> = BTreeMap::new();
        for r in &self.records {
            groups
                .entry((r.estimator.clone(), r.n, r.metric.clone()))
                .or_default()
                .push(r.value);
        }
        groups
            .into_iter()
            .map(|((estimator, n, metric), v)| {
                let k = v.len() as f64;
                let mean = v.iter().sum::<f64>() / k;
                let std_err = if v.len() > 1 {
                    (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0) / k).sqrt()
                } else {
                    0.0
                };
                SummaryRow {
                    estimator,
                    n,
                    metric,
                    runs: v.len(),
                    mean,
                    std_err,
                }
            })
            .collect()
    }

    pub fn summary_row(&self, estimator: &str, n: usize, metric: &str) -> Option<SummaryRow> {
        self.summary()
            .into_iter()
            .find(|r| r.estimator == estimator && r.n == n && r.metric == metric)
    }

    pub fn summary_json(&self) -> Value {
        json!({
            "scenario": self.config.scenario.name(),
            "rng": RNG_NAME,
            "config": self.config,
            "nonconverged": self.nonconverged,
            "summary": self.summary(),
            "extra": self.extra,
        })
    }

    pub fn write_records<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for r in &self.records {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Writes `results.csv` and `summary.json` into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        self.write_records(BufWriter::new(File::create(dir.join("results.csv"))?))?;
        let mut f = BufWriter::new(File::create(dir.join("summary.json"))?);
        serde_json::to_writer_pretty(&mut f, &self.summary_json())?;
        f.flush()?;
        Ok(())
    }
}

/// Seed of Monte Carlo run `run`, derived from the base seed.
pub fn run_seed(seed: u64, run: usize) -> u64 {
    rng_for(seed, run as u64).next_u64()
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    match cfg.scenario {
        Scenario::Fig1Batch | Scenario::Fig1Adaptive => mc_mse_experiment(cfg),
        Scenario::QtlSynthetic => qtl_synthetic(cfg),
        Scenario::QtlReal => qtl_real(cfg),
        Scenario::RipProbe => rip_probe(cfg),
    }
}

struct RunResult {
    records: Vec<Record>,
    nonconverged: usize,
}

fn collect(cfg: &ExperimentConfig, runs: Vec<Result<RunResult>>, extra: Value) -> Result<ExperimentOutput> {
    let mut records = Vec::new();
    let mut nonconverged = 0;
    // Index order regardless of how the runs were scheduled.
    for r in runs {
        let r = r?;
        records.extend(r.records);
        nonconverged += r.nonconverged;
    }
    Ok(ExperimentOutput {
        config: cfg.clone(),
        records,
        extra,
        nonconverged,
    })
}

/// Monte Carlo `||h0 - h||^2` against `N` for the LNL benchmark, batch
/// (ridge, Lasso, weighted Lasso) or adaptive (RLS, CCD-RL, CCD-RWL).
pub fn mc_mse_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let h0 = lnl_expand(&reference_lnl_system(), REFERENCE_MEMORY, REFERENCE_ORDER)?;
    let runs: Vec<Result<RunResult>> = (0..cfg.runs)
        .into_par_iter()
        .map(|run| match cfg.scenario {
            Scenario::Fig1Adaptive => adaptive_run(cfg, &h0, run),
            _ => batch_run(cfg, &h0, run),
        })
        .collect();
    collect(cfg, runs, json!({ "M": h0.catalog().len(), "true_nnz": h0.nnz() }))
}

fn lnl_draw(cfg: &ExperimentConfig, h0: &CoefficientVector, run: usize) -> Result<(Array2<f64>, Array1<f64>)> {
    let cat = h0.catalog();
    let n_max = *cfg.n_grid.last().expect("validated");
    let mut rng = rng_for(cfg.seed, run as u64);
    let seq = draw_sequence(InputKind::Gaussian, n_max + cat.vars() - 1, &mut rng);
    let x = cat.build_matrix_from_sequence(&seq)?;
    let noise = Normal::new(0.0, cfg.noise_var.sqrt()).map_err(|e| invalid(e.to_string()))?;
    let y = x.dot(h0.values()).mapv(|v| v + noise.sample(&mut rng));
    Ok((x, y))
}

fn sq_err(h: &Array1<f64>, h0: &Array1<f64>) -> f64 {
    h.iter().zip(h0.iter()).map(|(a, b)| (a - b) * (a - b)).sum()
}

fn record(cfg: &ExperimentConfig, est: &str, n: usize, run: usize, metric: &str, value: f64) -> Record {
    Record {
        scenario: cfg.scenario.name().to_string(),
        estimator: est.to_string(),
        n,
        run,
        metric: metric.to_string(),
        value,
    }
}

fn batch_run(cfg: &ExperimentConfig, h0: &CoefficientVector, run: usize) -> Result<RunResult> {
    let (x, y) = lnl_draw(cfg, h0, run)?;
    let m = x.ncols();
    let mut r = Array2::<f64>::zeros((m, m));
    let mut xty = Array1::<f64>::zeros(m);
    let mut yty = 0.0;
    let mut prev = 0;
    let mut out = RunResult {
        records: Vec::new(),
        nonconverged: 0,
    };
    let unit = vec![1.0; m];
    for &n in &cfg.n_grid {
        // Moments of the first n rows, grown incrementally.
        let xb = x.slice(s![prev..n, ..]);
        let yb = y.slice(s![prev..n]);
        r += &xb.t().dot(&xb);
        xty += &xb.t().dot(&yb);
        yty += yb.dot(&yb);
        prev = n;

        let mut a = r.clone();
        a.diag_mut().mapv_inplace(|v| v + cfg.ridge_delta);
        let h_ridge = Cholesky::factor(a.view())?.solve(xty.view());

        let engine = LassoEngine::from_moments(r.clone(), xty.clone(), yty)?;
        let solver = EstimatorConfig {
            active_set: true,
            weight_cap: cfg.weight_cap,
            ..Default::default()
        };
        let lasso = engine.solve(
            &EstimatorConfig {
                lambda: cfg.lasso_schedule.at(n),
                ..solver.clone()
            },
            &unit,
            None,
        )?;
        let w: Vec<f64> = h_ridge.iter().map(|v| (1.0 / v.abs()).min(cfg.weight_cap)).collect();
        let wlasso = engine.solve(
            &EstimatorConfig {
                lambda: cfg.wlasso_schedule.at(n),
                ..solver
            },
            &w,
            None,
        )?;
        out.nonconverged += usize::from(!lasso.converged) + usize::from(!wlasso.converged);
        for (name, h) in [("ridge", &h_ridge), ("lasso", &lasso.h), ("wlasso", &wlasso.h)] {
            out.records.push(record(cfg, name, n, run, "mse", sq_err(h, h0.values())));
        }
    }
    Ok(out)
}

fn adaptive_run(cfg: &ExperimentConfig, h0: &CoefficientVector, run: usize) -> Result<RunResult> {
    let (x, y) = lnl_draw(cfg, h0, run)?;
    let algs = [
        AdaptiveAlgorithm::Rls,
        AdaptiveAlgorithm::CcdRl {
            schedule: cfg.lasso_schedule,
        },
        AdaptiveAlgorithm::CcdRwl {
            schedule: cfg.wlasso_schedule,
        },
    ];
    let mut bank = AdaptiveBank::new(x.ncols(), cfg.ridge_delta, 1.0, &algs)?;
    let mut records = Vec::new();
    let mut next = 0;
    for (row, &yn) in x.rows().into_iter().zip(y.iter()) {
        if next == cfg.n_grid.len() {
            break;
        }
        bank.step(row, yn)?;
        if bank.samples() == cfg.n_grid[next] {
            for (k, alg) in algs.iter().enumerate() {
                let e = sq_err(bank.estimate(k), h0.values());
                records.push(record(cfg, alg.name(), bank.samples(), run, "mse", e));
            }
            next += 1;
        }
    }
    Ok(RunResult {
        records,
        nonconverged: 0,
    })
}

fn qtl_cv_spec(cfg: &ExperimentConfig, estimator: CvEstimator, seed: u64) -> CvSpec {
    let mut spec = CvSpec::new(estimator, cfg.cv.folds);
    spec.grid_points = cfg.cv.grid_points;
    spec.seed = seed;
    spec.solver.tol = cfg.cv.tol;
    spec.solver.weight_cap = cfg.weight_cap;
    spec
}

struct Tuned {
    fits: Vec<(Estimator, f64, CoefficientVector, bool)>,
    curves: Value,
}

/// CV-tunes ridge, then Lasso and weighted Lasso (weights from the tuned
/// ridge), and refits each on all samples.
fn tune_and_fit(cfg: &ExperimentConfig, problem: &RegressionProblem, seed: u64) -> Result<Tuned> {
    let ridge = cross_validate(problem, &qtl_cv_spec(cfg, CvEstimator::Ridge, seed))?;
    let lasso = cross_validate(problem, &qtl_cv_spec(cfg, CvEstimator::Lasso, seed))?;
    let wlasso = cross_validate(
        problem,
        &qtl_cv_spec(
            cfg,
            CvEstimator::Wlasso {
                delta: Some(ridge.parameter),
            },
            seed,
        ),
    )?;
    let base = EstimatorConfig {
        tol: cfg.cv.tol,
        mode: CcdMode::Auto,
        active_set: true,
        weight_cap: cfg.weight_cap,
        ..Default::default()
    };
    let ests = [
        (Estimator::Ridge { delta: ridge.parameter }, ridge.pe),
        (Estimator::Lasso { lambda: lasso.parameter }, lasso.pe),
        (
            Estimator::Wlasso {
                lambda: wlasso.parameter,
                delta: ridge.parameter,
            },
            wlasso.pe,
        ),
    ];
    let mut fits = Vec::new();
    for (est, pe) in ests {
        let rep = fit_estimator(problem, est, Preprocess::CENTER, &base)?;
        fits.push((est, pe, rep.h, rep.converged));
    }
    Ok(Tuned {
        fits,
        curves: json!({ "ridge": ridge, "lasso": lasso, "wlasso": wlasso }),
    })
}

fn qtl_synthetic(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let layout = cfg.qtl.resolve()?;
    let catalog = Arc::new(enumerate_basis(layout.markers, 2, ModelKind::Multilinear)?);
    let h_true = layout.true_coefficients(catalog.clone())?;
    let runs: Vec<Result<RunResult>> = (0..cfg.runs)
        .into_par_iter()
        .map(|run| {
            let seed = run_seed(cfg.seed, run);
            let data = gen_qtl(&layout, seed)?;
            let x = catalog.build_matrix_from_samples(data.genotypes.view())?;
            let problem = RegressionProblem::new(catalog.clone(), x, data.phenotype)?;
            let tuned = tune_and_fit(cfg, &problem, seed)?;
            let n = layout.individuals;
            let mut out = RunResult {
                records: Vec::new(),
                nonconverged: 0,
            };
            for (est, pe, h, converged) in &tuned.fits {
                out.nonconverged += usize::from(!converged);
                let m = support_metrics(h, &h_true, cfg.threshold)?;
                let name = est.name();
                let param = match est {
                    Estimator::Ridge { delta } => *delta,
                    Estimator::Lasso { lambda } | Estimator::Wlasso { lambda, .. } => *lambda,
                };
                for (metric, v) in [
                    ("pe", *pe),
                    ("parameter", param),
                    ("nnz", h.nnz() as f64),
                    ("f1", m.f1),
                    ("true_positives", m.true_positives as f64),
                    ("false_positives", m.false_positives as f64),
                    ("mse", m.sq_error),
                ] {
                    out.records.push(record(cfg, name, n, run, metric, v));
                }
            }
            Ok(out)
        })
        .collect();
    collect(
        cfg,
        runs,
        json!({ "M": catalog.len(), "true_support": h_true.support(0.0).len(), "layout": layout }),
    )
}

/// Marker-named effect list for coefficients above `threshold`, intercept
/// excluded, sorted by decreasing magnitude.
pub fn reported_effects(h: &CoefficientVector, markers: Option<&[String]>, threshold: f64) -> Vec<(String, f64)> {
    let cat: &BasisCatalog = h.catalog();
    let mut out: Vec<(String, f64)> = h
        .support(threshold)
        .into_iter()
        .filter(|&i| cat.key(i).degree() > 0)
        .map(|i| {
            let name = match markers {
                Some(names) => cat
                    .key(i)
                    .indices()
                    .iter()
                    .map(|&k| names[k].as_str())
                    .collect::<Vec<_>>()
                    .join("*"),
                None => cat.key(i).to_string(),
            };
            (name, h.values()[i])
        })
        .collect();
    out.sort_by(|a, b| b.1.abs().total_cmp(&a.1.abs()));
    out
}

fn qtl_real(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let path = cfg.data.as_ref().expect("validated");
    let data = load_genotype_csv(path)?;
    let n = data.problem.n_samples();
    let tuned = tune_and_fit(cfg, &data.problem, cfg.seed)?;
    let mut records = Vec::new();
    let mut nonconverged = 0;
    let mut effects = serde_json::Map::new();
    for (est, pe, h, converged) in &tuned.fits {
        nonconverged += usize::from(!converged);
        records.push(record(cfg, est.name(), n, 0, "pe", *pe));
        records.push(record(cfg, est.name(), n, 0, "nnz", h.nnz() as f64));
        if !matches!(est, Estimator::Ridge { .. }) {
            let list = reported_effects(h, data.markers.as_deref(), cfg.threshold);
            effects.insert(est.name().to_string(), json!(list));
        }
    }
    Ok(ExperimentOutput {
        config: cfg.clone(),
        records,
        extra: json!({
            "N": n,
            "L": data.genotypes.ncols(),
            "M": data.problem.n_features(),
            "missing": data.missing,
            "reported_effects": effects,
            "cv": tuned.curves,
        }),
        nonconverged,
    })
}

fn rip_probe(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let p = &cfg.probe;
    let mut records = Vec::new();
    let mut curves = Vec::new();
    for (k, kind) in p.kinds.iter().enumerate() {
        let curve = recovery_probe(*kind, p.l, &p.s_values, &cfg.n_grid, p.trials, run_seed(cfg.seed, k))?;
        let name = serde_json::to_value(kind)?.as_str().unwrap_or_default().to_string();
        for pt in &curve.points {
            records.push(record(cfg, &name, pt.n, 0, &format!("success_s{}", pt.s), pt.probability));
        }
        let n90: Vec<Value> = p
            .s_values
            .iter()
            .map(|&s| json!({ "s": s, "n_at_0.9": curve.n_at(s, 0.9) }))
            .collect();
        curves.push(json!({ "kind": name, "M": curve.m, "n_at_0.9": n90 }));
    }
    Ok(ExperimentOutput {
        config: cfg.clone(),
        records,
        extra: json!({ "curves": curves }),
        nonconverged: 0,
    })
}
