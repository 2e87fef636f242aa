//! Ridge, Lasso and weighted Lasso on one noisy LNL record.

use std::sync::Arc;

use sparse_volterra::estimators::{fit_estimator, CcdMode, Estimator, EstimatorConfig};
use sparse_volterra::eval::experiment::{reference_lnl_system, REFERENCE_MEMORY, REFERENCE_ORDER};
use sparse_volterra::polymodel::{lnl_expand, Inputs};
use sparse_volterra::problem::Preprocess;
use sparse_volterra::synth::{draw_sequence, rng_for, simulate_system, InputKind, System};

fn main() -> sparse_volterra::Result<()> {
    let n = 300;
    let h0 = lnl_expand(&reference_lnl_system(), REFERENCE_MEMORY, REFERENCE_ORDER)?;
    let cat = Arc::clone(h0.catalog());
    let seq = draw_sequence(InputKind::Gaussian, n + REFERENCE_MEMORY - 1, &mut rng_for(3, 0));
    let sim = simulate_system(&System::Coefficients(h0.clone()), cat, &Inputs::Sequence(seq), 0.1, 3)?;

    let nf = n as f64;
    let base = EstimatorConfig {
        mode: CcdMode::Auto,
        active_set: true,
        ..Default::default()
    };
    for est in [
        Estimator::Ridge { delta: 1.0 },
        Estimator::Lasso { lambda: 0.7 * nf.sqrt() },
        Estimator::Wlasso { lambda: 0.08 * nf.ln(), delta: 1.0 },
    ] {
        let rep = fit_estimator(&sim.problem, est, Preprocess::NONE, &base)?;
        let err: f64 = (rep.h.values() - h0.values()).mapv(|d| d * d).sum();
        println!(
            "{:>7}: ||h - h0||^2 = {err:.4}, nnz = {:>3}, sweeps = {}",
            est.name(),
            rep.h.nnz(),
            rep.sweeps
        );
    }
    Ok(())
}
