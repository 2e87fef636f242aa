use std::fs::{self, File};
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use sparse_volterra::adaptive::{track, write_trajectory_csv, AdaptiveAlgorithm, AdaptiveState, LambdaSchedule};
use sparse_volterra::error::Error;
use sparse_volterra::estimators::{fit_estimator, CcdMode, Estimator, EstimatorConfig};
use sparse_volterra::eval::data::{read_genotype_csv, read_samples_csv, write_genotype_csv};
use sparse_volterra::eval::experiment::{reference_lnl_system, run_experiment, ExperimentConfig, Scenario, REFERENCE_MEMORY, REFERENCE_ORDER};
use sparse_volterra::eval::{cross_validate, CvEstimator, CvSpec, Folds};
use sparse_volterra::polymodel::{enumerate_basis, lnl_expand, ModelKind};
use sparse_volterra::problem::{Preprocess, RegressionProblem};
use sparse_volterra::riplab::{
    brute_force_rip, build_modified_volterra, recovery_probe, volterra_rip_bound, ProbeKind, RipCertificate,
};
use sparse_volterra::synth::{draw_sequence, gen_qtl, rng_for, simulate_cascade, InputKind, QtlConfig};

#[derive(Parser)]
#[command(name = "svr", version, about = "Sparse Volterra and polynomial regression toolkit")]
struct Cli {
    /// Base seed for every random stream.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// JSON configuration file (experiment, simulate qtl).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; results go to stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Enumerate a basis catalog.
    Basis {
        #[arg(long)]
        vars: usize,
        #[arg(long)]
        order: usize,
        #[arg(long, default_value = "volterra")]
        kind: ModelKind,
        /// Print only the dimension.
        #[arg(long)]
        count: bool,
    },
    /// Generate synthetic data.
    Simulate {
        #[command(subcommand)]
        what: SimulateCmd,
    },
    /// Fit a batch estimator to CSV data.
    Fit {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, value_enum)]
        estimator: EstimatorArg,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        /// Ridge regularization (ridge, and the weights of wlasso).
        #[arg(long, default_value_t = 1.0)]
        delta: f64,
        /// Do not center before fitting.
        #[arg(long)]
        no_center: bool,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 10_000)]
        max_sweeps: usize,
    },
    /// Streaming fit; emits the per-step squared error.
    Adapt {
        #[arg(long, value_enum, default_value = "ccd-rwl")]
        algorithm: AlgorithmArg,
        /// `u,y` sequence CSV; the reference LNL system is simulated when absent.
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long, default_value_t = REFERENCE_MEMORY)]
        memory: usize,
        #[arg(long, default_value_t = REFERENCE_ORDER)]
        order: usize,
        /// Samples to simulate.
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 0.1)]
        noise_var: f64,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[arg(long, default_value_t = 1.0)]
        delta: f64,
        /// Constant penalty instead of the default schedule.
        #[arg(long)]
        lambda: Option<f64>,
    },
    /// Cross-validate an estimator.
    Cv {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, value_enum)]
        estimator: EstimatorArg,
        /// Fold count, or `loo`.
        #[arg(long, default_value = "10")]
        folds: String,
        #[arg(long, default_value_t = 100)]
        grid_points: usize,
        /// Fixed ridge delta for wlasso weights (tuned when absent).
        #[arg(long)]
        delta: Option<f64>,
    },
    /// RIP certificates, exact constants, bounds and recovery probes.
    Rip {
        #[command(subcommand)]
        what: RipCmd,
    },
    /// Run a named experiment scenario.
    Experiment {
        scenario: Option<Scenario>,
        /// Override the Monte Carlo run count.
        #[arg(long)]
        runs: Option<usize>,
    },
}

#[derive(Subcommand)]
enum SimulateCmd {
    /// Reference LNL cascade driven by an i.i.d. sequence; writes `u,y`.
    Lnl {
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 0.1)]
        noise_var: f64,
        #[arg(long, default_value = "gaussian")]
        input: InputKind,
    },
    /// QTL genotypes and phenotypes (shipped default unless --config).
    Qtl,
}

#[derive(Subcommand)]
enum RipCmd {
    /// Gershgorin certificate of one modified second-order Volterra matrix.
    Certificate {
        #[arg(long)]
        l: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 3)]
        s: usize,
        /// Also enumerate all s-subsets.
        #[arg(long)]
        exact: bool,
    },
    /// Sample-size bound for the modified Volterra matrix.
    Bound {
        #[arg(long)]
        l: usize,
        #[arg(long)]
        s: usize,
        #[arg(long, default_value_t = 0.5)]
        delta: f64,
        #[arg(long, default_value_t = 0.5)]
        gamma: f64,
        #[arg(long)]
        n: Option<usize>,
    },
    /// Empirical sparse-recovery success against N.
    Probe {
        #[arg(long, default_value = "lq-iid")]
        kind: ProbeKind,
        #[arg(long, default_value_t = 30)]
        l: usize,
        #[arg(long, value_delimiter = ',', default_values_t = [2, 4, 8])]
        s: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_values_t = [40, 80, 120, 160, 200])]
        n: Vec<usize>,
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
}

#[derive(Args)]
struct DataArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_enum, default_value = "genotype")]
    layout: Layout,
    /// Catalog kind for `samples`.
    #[arg(long, default_value = "polynomial-iid")]
    kind: ModelKind,
    #[arg(long, default_value_t = 2)]
    order: usize,
    /// Lag window for `sequence`.
    #[arg(long, default_value_t = 3)]
    memory: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Layout {
    /// Markers in {-1, 0, 1} or NA, last column phenotype; multilinear order 2.
    Genotype,
    /// Input columns then the response.
    Samples,
    /// Two columns `u,y`; Volterra regressors over a lag window.
    Sequence,
}

#[derive(Clone, Copy, ValueEnum)]
enum EstimatorArg {
    Ridge,
    Lasso,
    Wlasso,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgorithmArg {
    Rls,
    CcdRl,
    CcdRwl,
}

enum Failure {
    Usage(String),
    Data(String),
    NotConverged(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(_) | Error::TooManySubsets { .. } | Error::Infeasible(_) => Failure::Usage(e.to_string()),
            _ => Failure::Data(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

type CliResult = Result<(), Failure>;

/// Writes `content` to `<out>/<name>`, or stdout without `--out`.
fn emit(out: &Option<PathBuf>, name: &str, content: &str) -> CliResult {
    match out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            let path = dir.join(name);
            fs::write(&path, content)?;
            eprintln!("wrote {}", path.display());
        }
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(content.as_bytes())?;
            if !content.ends_with('\n') {
                so.write_all(b"\n")?;
            }
        }
    }
    Ok(())
}

fn pretty(v: &serde_json::Value) -> String {
    serde_json::to_string_pretty(v).expect("serializable")
}

fn load_problem(d: &DataArgs) -> Result<RegressionProblem, Failure> {
    let file = BufReader::new(File::open(&d.data)?);
    match d.layout {
        Layout::Genotype => {
            let g = read_genotype_csv(file)?;
            if g.missing > 0 {
                eprintln!("imputed {} missing genotype cells as 0", g.missing);
            }
            Ok(g.problem)
        }
        Layout::Samples => {
            let (x, y) = read_samples_csv(file)?;
            let cat = Arc::new(enumerate_basis(x.ncols(), d.order, d.kind)?);
            let design = cat.build_matrix_from_samples(x.view())?;
            Ok(RegressionProblem::new(cat, design, y)?)
        }
        Layout::Sequence => {
            let (u, y) = read_samples_csv(file)?;
            if u.ncols() != 1 {
                return Err(Failure::Data("sequence layout needs exactly two columns u,y".into()));
            }
            let (seq, y) = (u.column(0).to_vec(), y);
            let cat = Arc::new(enumerate_basis(d.memory, d.order, ModelKind::Volterra)?);
            let design = cat.build_matrix_from_sequence(&seq)?;
            let y = y.slice(ndarray::s![d.memory - 1..]).to_owned();
            Ok(RegressionProblem::new(cat, design, y)?)
        }
    }
}

fn estimator(arg: EstimatorArg, lambda: f64, delta: f64) -> Estimator {
    match arg {
        EstimatorArg::Ridge => Estimator::Ridge { delta },
        EstimatorArg::Lasso => Estimator::Lasso { lambda },
        EstimatorArg::Wlasso => Estimator::Wlasso { lambda, delta },
    }
}

fn run(cli: Cli) -> CliResult {
    let out = &cli.out;
    match cli.cmd {
        Cmd::Basis {
            vars,
            order,
            kind,
            count,
        } => {
            let cat = enumerate_basis(vars, order, kind)?;
            if count {
                return emit(out, "dimension.txt", &cat.len().to_string());
            }
            let v = json!({
                "kind": kind,
                "vars": vars,
                "order": order,
                "dimension": cat.len(),
                "keys": cat.key_strings(),
            });
            emit(out, "catalog.json", &pretty(&v))
        }
        Cmd::Simulate { what } => match what {
            SimulateCmd::Lnl { n, noise_var, input } => {
                let sys = reference_lnl_system();
                let mut rng = rng_for(cli.seed, 0);
                let u = draw_sequence(input, n, &mut rng);
                let clean = simulate_cascade(&sys, &u, sys.memory())?;
                let mut noise_rng = rng_for(cli.seed, 1);
                let sd = noise_var.sqrt();
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(["u", "y"]).map_err(|e| Failure::Data(e.to_string()))?;
                for (ut, yt) in u.iter().zip(clean) {
                    let y = yt + sd * InputKind::Gaussian.draw(&mut noise_rng);
                    w.write_record([ut.to_string(), y.to_string()])
                        .map_err(|e| Failure::Data(e.to_string()))?;
                }
                let bytes = w.into_inner().map_err(|e| Failure::Data(e.to_string()))?;
                emit(out, "lnl.csv", &String::from_utf8_lossy(&bytes))
            }
            SimulateCmd::Qtl => {
                let cfg = match &cli.config {
                    Some(p) => serde_json::from_str::<QtlConfig>(&fs::read_to_string(p)?)
                        .map_err(|e| Failure::Data(e.to_string()))?,
                    None => QtlConfig::default_scenario(),
                };
                let data = gen_qtl(&cfg, cli.seed)?;
                let mut buf = Vec::new();
                write_genotype_csv(&mut buf, data.genotypes.view(), data.phenotype.view())?;
                eprintln!("noise variance {:.4}", data.noise_var);
                emit(out, "qtl.csv", &String::from_utf8_lossy(&buf))
            }
        },
        Cmd::Fit {
            data,
            estimator: which,
            lambda,
            delta,
            no_center,
            tol,
            max_sweeps,
        } => {
            let problem = load_problem(&data)?;
            let est = estimator(which, lambda, delta);
            let base = EstimatorConfig {
                tol,
                max_sweeps,
                mode: CcdMode::Auto,
                active_set: true,
                ..Default::default()
            };
            let prep = if no_center { Preprocess::NONE } else { Preprocess::CENTER };
            let rep = fit_estimator(&problem, est, prep, &base)?;
            emit(out, "fit.json", &pretty(&rep.to_json(Some(est.name()))))?;
            if !rep.converged {
                return Err(Failure::NotConverged(format!("stopped after {} sweeps", rep.sweeps)));
            }
            Ok(())
        }
        Cmd::Adapt {
            algorithm,
            data,
            memory,
            order,
            n,
            noise_var,
            beta,
            delta,
            lambda,
        } => {
            let (cat, h_true, x, y) = match &data {
                Some(path) => {
                    let (u, y) = read_samples_csv(BufReader::new(File::open(path)?))?;
                    if u.ncols() != 1 {
                        return Err(Failure::Data("adapt needs two columns u,y".into()));
                    }
                    let cat = Arc::new(enumerate_basis(memory, order, ModelKind::Volterra)?);
                    let x = cat.build_matrix_from_sequence(&u.column(0).to_vec())?;
                    let y = y.slice(ndarray::s![memory - 1..]).to_owned();
                    (cat, None, x, y)
                }
                None => {
                    let h0 = lnl_expand(&reference_lnl_system(), memory, order)?;
                    let mut rng = rng_for(cli.seed, 0);
                    let seq = draw_sequence(InputKind::Gaussian, n + memory - 1, &mut rng);
                    let x = h0.catalog().build_matrix_from_sequence(&seq)?;
                    let mut nrng = rng_for(cli.seed, 1);
                    let sd = noise_var.sqrt();
                    let y = x.dot(h0.values()).mapv(|v| v + sd * InputKind::Gaussian.draw(&mut nrng));
                    (h0.catalog().clone(), Some(h0), x, y)
                }
            };
            let alg = match algorithm {
                AlgorithmArg::Rls => AdaptiveAlgorithm::Rls,
                AlgorithmArg::CcdRl => AdaptiveAlgorithm::CcdRl {
                    schedule: lambda.map_or(LambdaSchedule::RL_DEFAULT, LambdaSchedule::Constant),
                },
                AlgorithmArg::CcdRwl => AdaptiveAlgorithm::CcdRwl {
                    schedule: lambda.map_or(LambdaSchedule::RWL_DEFAULT, LambdaSchedule::Constant),
                },
            };
            let mut state = AdaptiveState::new(cat.len(), delta, beta, matches!(alg, AdaptiveAlgorithm::Rls | AdaptiveAlgorithm::CcdRwl { .. }))?;
            let mut buf = Vec::new();
            match h_true {
                Some(h0) => {
                    let pts = track(&mut state, alg, x.view(), y.view(), h0.values().view())?;
                    write_trajectory_csv(&mut buf, &pts)?;
                }
                None => {
                    // No ground truth: a-priori squared prediction error per step.
                    let mut w = csv::Writer::from_writer(&mut buf);
                    w.write_record(["n", "sq_prediction_error"]).map_err(|e| Failure::Data(e.to_string()))?;
                    for (row, &yn) in x.rows().into_iter().zip(y.iter()) {
                        let pred = row.dot(state.estimate());
                        alg.step(&mut state, row, yn)?;
                        w.write_record([state.samples().to_string(), ((yn - pred) * (yn - pred)).to_string()])
                            .map_err(|e| Failure::Data(e.to_string()))?;
                    }
                    w.flush()?;
                }
            }
            emit(out, "trajectory.csv", &String::from_utf8_lossy(&buf))
        }
        Cmd::Cv {
            data,
            estimator: which,
            folds,
            grid_points,
            delta,
        } => {
            let problem = load_problem(&data)?;
            let folds = if folds == "loo" {
                Folds::LeaveOneOut
            } else {
                Folds::K(folds.parse().map_err(|_| Failure::Usage(format!("bad fold count {folds:?}")))?)
            };
            let est = match which {
                EstimatorArg::Ridge => CvEstimator::Ridge,
                EstimatorArg::Lasso => CvEstimator::Lasso,
                EstimatorArg::Wlasso => CvEstimator::Wlasso { delta },
            };
            let mut spec = CvSpec::new(est, folds);
            spec.grid_points = grid_points;
            spec.seed = cli.seed;
            let res = cross_validate(&problem, &spec)?;
            emit(out, "cv.json", &pretty(&serde_json::to_value(&res).expect("serializable")))
        }
        Cmd::Rip { what } => match what {
            RipCmd::Certificate { l, n, s, exact } => {
                let mut rng = rng_for(cli.seed, 0);
                let seq = draw_sequence(InputKind::Uniform, n + l - 1, &mut rng);
                let xm = build_modified_volterra(&seq, l, n)?;
                let cert = RipCertificate::from_grammian(xm.grammian().view(), s);
                let mut v = json!({ "L": l, "N": n, "M": xm.matrix.ncols(), "certificate": cert });
                if exact {
                    v["exact_delta_s"] = json!(brute_force_rip(xm.matrix.view(), s)?);
                }
                emit(out, "certificate.json", &pretty(&v))
            }
            RipCmd::Bound { l, s, delta, gamma, n } => {
                let b = volterra_rip_bound(l, s, delta, gamma, n)?;
                emit(out, "bound.json", &pretty(&serde_json::to_value(b).expect("serializable")))
            }
            RipCmd::Probe { kind, l, s, mut n, trials } => {
                n.sort_unstable();
                n.dedup();
                let curve = recovery_probe(kind, l, &s, &n, trials, cli.seed)?;
                let mut buf = Vec::new();
                curve.write_csv(&mut buf)?;
                emit(out, "probe.csv", &String::from_utf8_lossy(&buf))
            }
        },
        Cmd::Experiment { scenario, runs } => {
            let mut cfg = match &cli.config {
                Some(p) => {
                    let text = fs::read_to_string(p)?;
                    ExperimentConfig::from_json(&text)?
                }
                None => ExperimentConfig::preset(scenario.unwrap_or(Scenario::Fig1Batch)),
            };
            if let Some(sc) = scenario {
                if sc != cfg.scenario {
                    return Err(Failure::Usage(format!(
                        "scenario {} conflicts with the config's {}",
                        sc.name(),
                        cfg.scenario.name()
                    )));
                }
            }
            cfg.seed = cli.seed;
            if let Some(r) = runs {
                cfg.runs = r;
            }
            if cfg.out_dir.is_none() {
                cfg.out_dir = out.clone();
            }
            let res = run_experiment(&cfg)?;
            match &cfg.out_dir {
                Some(dir) => {
                    res.write_to(Path::new(dir))?;
                    eprintln!("wrote {}/results.csv and summary.json", dir.display());
                }
                None => emit(&None, "", &pretty(&res.summary_json()))?,
            }
            if res.nonconverged > 0 {
                return Err(Failure::NotConverged(format!("{} solver calls hit the sweep limit", res.nonconverged)));
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Data(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::NotConverged(m)) => {
            eprintln!("not converged: {m}");
            ExitCode::from(3)
        }
    }
}
