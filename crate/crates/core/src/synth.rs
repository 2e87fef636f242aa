//! Seeded input generation, system simulation and QTL datasets.
//!
//! Every generator draws from ChaCha20 keyed by `(seed, stream)`; Monte Carlo
//! run `r` uses stream `r`, so runs are independent and reproducible
//! regardless of scheduling.

use std::sync::Arc;

use ndarray::{Array1, Array2};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::polymodel::{lag_window, BasisCatalog, CoefficientVector, Inputs, LnlSystem, ModelKind};
use crate::problem::RegressionProblem;

/// Name of the generator, written into experiment outputs.
pub const RNG_ALGORITHM: &str = "chacha20(seed_from_u64, stream=run)";

/// Deterministic generator for `(seed, stream)`.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Marginal distribution of input samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InputKind {
    /// `U[-1, 1]`.
    Uniform,
    /// `N(0, 1)`.
    Gaussian,
    /// `{-1, 0, 1}` equiprobable.
    Ternary,
    /// `{-1, 1}` equiprobable.
    Binary,
}

impl InputKind {
    pub fn draw<R: Rng + ?Sized>(self, rng: &mut R) -> f64 {
        match self {
            InputKind::Uniform => rng.random_range(-1.0..=1.0),
            InputKind::Gaussian => StandardNormal.sample(rng),
            InputKind::Ternary => rng.random_range(-1i32..=1) as f64,
            InputKind::Binary => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
        }
    }
}

impl std::str::FromStr for InputKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(InputKind::Uniform),
            "gaussian" => Ok(InputKind::Gaussian),
            "ternary" => Ok(InputKind::Ternary),
            "binary" => Ok(InputKind::Binary),
            other => Err(invalid(format!("unknown input kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InputSpec {
    pub kind: InputKind,
    pub n: usize,
    pub seed: u64,
}

/// I.i.d. scalar sequence of length `spec.n`.
pub fn gen_input(spec: &InputSpec) -> Vec<f64> {
    let mut rng = rng_for(spec.seed, 0);
    draw_sequence(spec.kind, spec.n, &mut rng)
}

pub fn draw_sequence<R: Rng + ?Sized>(kind: InputKind, n: usize, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| kind.draw(rng)).collect()
}

/// `n x vars` matrix of i.i.d. samples.
pub fn draw_matrix<R: Rng + ?Sized>(kind: InputKind, n: usize, vars: usize, rng: &mut R) -> Array2<f64> {
    Array2::from_shape_simple_fn((n, vars), || kind.draw(rng))
}

/// A ground-truth system to simulate.
#[derive(Debug, Clone)]
pub enum System {
    Coefficients(CoefficientVector),
    Lnl(LnlSystem),
}

/// Output of [`simulate_system`]: the regression problem (design built from
/// `catalog`) plus the noiseless response.
#[derive(Debug, Clone)]
pub struct Simulated {
    pub problem: RegressionProblem,
    pub noiseless: Array1<f64>,
}

/// Direct time-domain LNL simulation: filter, pointwise polynomial, filter.
/// Output `t` is produced for every `t >= memory - 1`.
pub fn simulate_cascade(sys: &LnlSystem, seq: &[f64], memory: usize) -> Result<Vec<f64>> {
    if memory < sys.memory() {
        return Err(invalid("window shorter than the cascade memory"));
    }
    if seq.len() < memory {
        return Err(Error::InsufficientSamples {
            needed: memory,
            available: seq.len(),
        });
    }
    let first = sys.ha.len() - 1;
    // Intermediate signal v(t) = f(sum_k h_a(k) x(t-k)).
    let v: Vec<f64> = (0..seq.len())
        .map(|t| {
            if t < first {
                return 0.0;
            }
            let u: f64 = sys.ha.iter().enumerate().map(|(k, a)| a * seq[t - k]).sum();
            sys.nonlinearity(u)
        })
        .collect();
    Ok((memory - 1..seq.len())
        .map(|t| sys.hb.iter().enumerate().map(|(j, b)| b * v[t - j]).sum())
        .collect())
}

/// Simulates `y(n) = f(window n) + v(n)` with `v ~ N(0, noise_var)`.
pub fn simulate_system(
    system: &System,
    catalog: Arc<BasisCatalog>,
    inputs: &Inputs,
    noise_var: f64,
    seed: u64,
) -> Result<Simulated> {
    if !(noise_var >= 0.0) {
        return Err(invalid("noise variance must be non-negative"));
    }
    let x = catalog.build_matrix(inputs)?;
    let noiseless = match system {
        System::Coefficients(h) => {
            if **h.catalog() != *catalog {
                return Err(Error::CatalogMismatch(
                    "true coefficients use a different catalog".into(),
                ));
            }
            x.dot(h.values())
        }
        System::Lnl(sys) => {
            let Inputs::Sequence(seq) = inputs else {
                return Err(invalid("LNL simulation needs a scalar input sequence"));
            };
            if catalog.kind() != ModelKind::Volterra {
                return Err(invalid("LNL simulation needs a volterra catalog"));
            }
            Array1::from(simulate_cascade(sys, seq, catalog.vars())?)
        }
    };
    let mut rng = rng_for(seed, 1);
    let noise = Normal::new(0.0, noise_var.sqrt()).expect("finite std");
    let y = noiseless.mapv(|v| v + noise.sample(&mut rng));
    Ok(Simulated {
        problem: RegressionProblem::new(catalog, x, y)?,
        noiseless,
    })
}

/// Convenience: window `n` of a sequence for a memory-`vars` model.
pub fn window(seq: &[f64], vars: usize, n: usize) -> Vec<f64> {
    let mut w = vec![0.0; vars];
    lag_window(seq, n + vars - 1, &mut w);
    w
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MainEffect {
    pub marker: usize,
    pub effect: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpistaticEffect {
    pub markers: [usize; 2],
    pub effect: f64,
}

/// How the residual noise is sized.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VarianceTarget {
    /// Total phenotypic variance; noise is back-solved from the empirical
    /// genetic variance.
    Total(f64),
    /// Fixed noise variance.
    Noise(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QtlConfig {
    pub individuals: usize,
    pub markers: usize,
    pub main_effects: Vec<MainEffect>,
    pub epistatic_effects: Vec<EpistaticEffect>,
    pub mean: f64,
    pub variance: VarianceTarget,
    pub alphabet: InputKind,
}

const DEFAULT_QTL_JSON: &str = include_str!("../data/qtl_default.json");

impl QtlConfig {
    /// Shipped default: 600 individuals, 121 markers (1800 cM every 15 cM),
    /// mean 5, total variance 10, 9 main and 13 epistatic QTLs at frozen
    /// positions and effects.
    pub fn default_scenario() -> Self {
        serde_json::from_str(DEFAULT_QTL_JSON).expect("shipped QTL config parses")
    }

    /// Random QTL layout: distinct main-effect markers and distinct pairs,
    /// effects Gaussian with the given scales. Used to produce the shipped
    /// default (seed 1800015) and reduced-scale scenarios.
    #[allow(clippy::too_many_arguments)]
    pub fn random_layout(
        individuals: usize,
        markers: usize,
        n_main: usize,
        n_epistatic: usize,
        main_scale: f64,
        epistatic_scale: f64,
        mean: f64,
        variance: VarianceTarget,
        alphabet: InputKind,
        seed: u64,
    ) -> Result<Self> {
        if markers < 2 || n_main > markers {
            return Err(invalid("not enough markers for the requested QTLs"));
        }
        let mut rng = rng_for(seed, 0);
        let main_markers = sample(&mut rng, markers, n_main).into_vec();
        let mut main_sorted = main_markers.clone();
        main_sorted.sort_unstable();
        let draw_effect = |rng: &mut ChaCha20Rng, scale: f64| {
            let z: f64 = StandardNormal.sample(rng);
            // Keep effects away from zero so every QTL is detectable in principle.
            let mag = scale * (0.5 + z.abs());
            let mag = (mag * 100.0).round() / 100.0;
            if rng.random::<bool>() {
                mag
            } else {
                -mag
            }
        };
        let main_effects = main_sorted
            .iter()
            .map(|&m| MainEffect {
                marker: m,
                effect: draw_effect(&mut rng, main_scale),
            })
            .collect();
        let mut pairs: Vec<[usize; 2]> = Vec::new();
        while pairs.len() < n_epistatic {
            // Half the pairs touch a main-effect marker.
            let a = if pairs.len() % 2 == 0 && n_main > 0 {
                main_markers[rng.random_range(0..n_main)]
            } else {
                rng.random_range(0..markers)
            };
            let b = rng.random_range(0..markers);
            if a == b {
                continue;
            }
            let p = [a.min(b), a.max(b)];
            if !pairs.contains(&p) {
                pairs.push(p);
            }
        }
        pairs.sort_unstable();
        let epistatic_effects = pairs
            .into_iter()
            .map(|markers| EpistaticEffect {
                markers,
                effect: draw_effect(&mut rng, epistatic_scale),
            })
            .collect();
        let cfg = QtlConfig {
            individuals,
            markers,
            main_effects,
            epistatic_effects,
            mean,
            variance,
            alphabet,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.individuals == 0 || self.markers == 0 {
            return Err(invalid("QTL config needs individuals and markers"));
        }
        if !matches!(self.alphabet, InputKind::Binary | InputKind::Ternary) {
            return Err(invalid("genotype alphabet must be binary or ternary"));
        }
        for e in &self.main_effects {
            if e.marker >= self.markers {
                return Err(invalid(format!("main-effect marker {} out of range", e.marker)));
            }
        }
        for e in &self.epistatic_effects {
            let [a, b] = e.markers;
            if a >= self.markers || b >= self.markers || a == b {
                return Err(invalid(format!("bad epistatic pair ({a},{b})")));
            }
        }
        match self.variance {
            VarianceTarget::Total(v) | VarianceTarget::Noise(v) if !(v >= 0.0) => {
                Err(invalid("variance must be non-negative"))
            }
            _ => Ok(()),
        }
    }

    /// True coefficients on the multilinear P=2 catalog over the markers.
    pub fn true_coefficients(&self, catalog: Arc<BasisCatalog>) -> Result<CoefficientVector> {
        if catalog.kind() != ModelKind::Multilinear || catalog.vars() != self.markers || catalog.order() < 2 {
            return Err(Error::CatalogMismatch(
                "QTL coefficients need a multilinear catalog over the markers, P >= 2".into(),
            ));
        }
        let mut h = CoefficientVector::zeros(catalog.clone());
        h.values_mut()[catalog.intercept_position()] = self.mean;
        for e in &self.main_effects {
            let i = catalog.position_of(&[e.marker]).expect("marker key");
            h.values_mut()[i] += e.effect;
        }
        for e in &self.epistatic_effects {
            let i = catalog.position_of(&e.markers).expect("pair key");
            h.values_mut()[i] += e.effect;
        }
        Ok(h)
    }

    /// Genetic value `mean + sum main + sum epistatic` for one genotype row.
    pub fn genetic_value(&self, g: ndarray::ArrayView1<f64>) -> f64 {
        let main: f64 = self.main_effects.iter().map(|e| e.effect * g[e.marker]).sum();
        let epi: f64 = self
            .epistatic_effects
            .iter()
            .map(|e| e.effect * g[e.markers[0]] * g[e.markers[1]])
            .sum();
        self.mean + main + epi
    }
}

#[derive(Debug, Clone)]
pub struct QtlData {
    pub genotypes: Array2<f64>,
    pub phenotype: Array1<f64>,
    pub genetic: Array1<f64>,
    pub noise_var: f64,
}

/// Draws genotypes and phenotypes for `cfg`.
pub fn gen_qtl(cfg: &QtlConfig, seed: u64) -> Result<QtlData> {
    cfg.validate()?;
    let mut rng = rng_for(seed, 0);
    let genotypes = draw_matrix(cfg.alphabet, cfg.individuals, cfg.markers, &mut rng);
    phenotypes_for(cfg, genotypes, seed)
}

/// Phenotypes for fixed genotypes (new noise per `seed`).
pub fn phenotypes_for(cfg: &QtlConfig, genotypes: Array2<f64>, seed: u64) -> Result<QtlData> {
    cfg.validate()?;
    if genotypes.ncols() != cfg.markers {
        return Err(Error::DimensionMismatch {
            expected: cfg.markers,
            got: genotypes.ncols(),
        });
    }
    let genetic: Array1<f64> = genotypes.rows().into_iter().map(|g| cfg.genetic_value(g)).collect();
    let noise_var = match cfg.variance {
        VarianceTarget::Noise(v) => v,
        VarianceTarget::Total(total) => {
            let gvar = genetic.var(0.0);
            let nv = total - gvar;
            if nv < 0.0 {
                return Err(Error::Infeasible(format!(
                    "genetic variance {gvar:.4} exceeds the target total variance {total}"
                )));
            }
            nv
        }
    };
    let mut rng = rng_for(seed, 1);
    let noise = Normal::new(0.0, noise_var.sqrt()).expect("finite std");
    let phenotype = genetic.mapv(|g| g + noise.sample(&mut rng));
    Ok(QtlData {
        genotypes,
        phenotype,
        genetic,
        noise_var,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polymodel::{enumerate_basis, evaluate_model, lnl_expand};

    fn moment(xs: &[f64], p: i32) -> f64 {
        xs.iter().map(|x| x.powi(p)).sum::<f64>() / xs.len() as f64
    }

    #[test]
    fn inputs_are_reproducible() {
        let spec = InputSpec {
            kind: InputKind::Gaussian,
            n: 64,
            seed: 9,
        };
        assert_eq!(gen_input(&spec), gen_input(&spec));
        let other = InputSpec { seed: 10, ..spec };
        assert_ne!(gen_input(&spec), gen_input(&other));
    }

    #[test]
    fn input_moments() {
        let n = 100_000;
        let u = gen_input(&InputSpec {
            kind: InputKind::Uniform,
            n,
            seed: 1,
        });
        assert!(u.iter().all(|v| (-1.0..=1.0).contains(v)));
        assert!((moment(&u, 2) - 1.0 / 3.0).abs() < 0.01);
        // sd of x^4 under U[-1,1] is sqrt(1/9 - 1/25) ~ 0.27; 3 sigma / sqrt(n).
        assert!((moment(&u, 4) - 0.2).abs() < 3.0 * 0.27 / (n as f64).sqrt());
        let t = gen_input(&InputSpec {
            kind: InputKind::Ternary,
            n,
            seed: 2,
        });
        assert!(t.iter().all(|v| [-1.0, 0.0, 1.0].contains(v)));
        assert!(moment(&t, 1).abs() < 0.01);
        assert!((moment(&t, 2) - 2.0 / 3.0).abs() < 0.01);
    }

    #[test]
    fn noiseless_linear_one_hot_is_delay() {
        let cat = Arc::new(enumerate_basis(4, 2, ModelKind::Volterra).unwrap());
        let mut h = CoefficientVector::zeros(cat.clone());
        h.set(&crate::polymodel::MonomialKey(vec![2]), 1.0).unwrap();
        let seq = gen_input(&InputSpec {
            kind: InputKind::Uniform,
            n: 30,
            seed: 3,
        });
        let sim = simulate_system(&System::Coefficients(h), cat, &Inputs::Sequence(seq.clone()), 0.0, 0).unwrap();
        for n in 0..sim.problem.n_samples() {
            // Row n has x(n) at sequence index n + 3; lag 2 is index n + 1.
            assert_eq!(sim.problem.y[n], seq[n + 1]);
        }
    }

    #[test]
    fn cascade_matches_expansion() {
        let sys = LnlSystem::new(vec![0.4, -0.8, 0.3], vec![0.2, 1.0, -0.6, 0.25], vec![1.0, 0.5]).unwrap();
        let h = lnl_expand(&sys, 5, 3).unwrap();
        let seq = gen_input(&InputSpec {
            kind: InputKind::Gaussian,
            n: 40,
            seed: 5,
        });
        let direct = simulate_cascade(&sys, &seq, 5).unwrap();
        for (n, y) in direct.iter().enumerate() {
            let w = window(&seq, 5, n);
            assert!((evaluate_model(&h, &w).unwrap() - y).abs() < 1e-10);
        }
    }

    #[test]
    fn shipped_qtl_default() {
        let cfg = QtlConfig::default_scenario();
        assert_eq!(cfg.individuals, 600);
        assert_eq!(cfg.markers, 121);
        assert_eq!(cfg.main_effects.len(), 9);
        assert_eq!(cfg.epistatic_effects.len(), 13);
        assert_eq!(cfg.mean, 5.0);
        assert_eq!(cfg.variance, VarianceTarget::Total(10.0));
        let data = gen_qtl(&cfg, 11).unwrap();
        assert_eq!(data.genotypes.dim(), (600, 121));
        assert!(data.noise_var > 0.0);
        let var = data.phenotype.var(0.0);
        assert!((var - 10.0).abs() < 2.0, "phenotypic variance {var}");
    }

    #[test]
    fn qtl_single_effect_no_noise() {
        let cfg = QtlConfig {
            individuals: 50,
            markers: 6,
            main_effects: vec![MainEffect { marker: 3, effect: 1.25 }],
            epistatic_effects: vec![],
            mean: 5.0,
            variance: VarianceTarget::Noise(0.0),
            alphabet: InputKind::Ternary,
        };
        let d = gen_qtl(&cfg, 4).unwrap();
        for n in 0..50 {
            assert_eq!(d.phenotype[n] - 5.0, 1.25 * d.genotypes[[n, 3]]);
        }
    }

    #[test]
    fn qtl_zero_effects_and_infeasible() {
        let mut cfg = QtlConfig {
            individuals: 20_000,
            markers: 3,
            main_effects: vec![],
            epistatic_effects: vec![],
            mean: 2.0,
            variance: VarianceTarget::Total(4.0),
            alphabet: InputKind::Binary,
        };
        let d = gen_qtl(&cfg, 8).unwrap();
        assert_eq!(d.noise_var, 4.0);
        assert!((d.phenotype.mean().unwrap() - 2.0).abs() < 0.05);
        assert!((d.phenotype.var(0.0) - 4.0).abs() < 0.15);

        cfg.individuals = 200;
        cfg.main_effects = vec![MainEffect { marker: 0, effect: 5.0 }];
        assert!(matches!(gen_qtl(&cfg, 8), Err(Error::Infeasible(_))));
        cfg.epistatic_effects = vec![EpistaticEffect { markers: [1, 1], effect: 1.0 }];
        assert!(gen_qtl(&cfg, 8).is_err());
    }
}
