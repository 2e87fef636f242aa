//! Expands the benchmark LNL cascade into Volterra kernels and checks the
//! expansion against direct simulation of the cascade.

use sparse_volterra::eval::experiment::{reference_lnl_system, REFERENCE_MEMORY, REFERENCE_ORDER};
use sparse_volterra::polymodel::{evaluate_model, lnl_expand};
use sparse_volterra::synth::{draw_sequence, rng_for, simulate_cascade, window, InputKind};

fn main() -> sparse_volterra::Result<()> {
    let sys = reference_lnl_system();
    let h = lnl_expand(&sys, REFERENCE_MEMORY, REFERENCE_ORDER)?;
    println!("{} nonzero kernels out of {}", h.nnz(), h.catalog().len());
    for (key, v) in h.named().into_iter().filter(|(_, v)| v.abs() > 0.3) {
        println!("  h[{key}] = {v:.4}");
    }

    let seq = draw_sequence(InputKind::Gaussian, 200, &mut rng_for(7, 0));
    let direct = simulate_cascade(&sys, &seq, REFERENCE_MEMORY)?;
    let worst = (0..direct.len())
        .map(|n| {
            let w = window(&seq, REFERENCE_MEMORY, n);
            (evaluate_model(&h, &w).unwrap() - direct[n]).abs()
        })
        .fold(0.0, f64::max);
    println!("max |expansion - cascade| over {} windows: {worst:.2e}", direct.len());
    Ok(())
}
