//! RLS, CCD-RL and CCD-RWL tracking the benchmark system sample by sample.

use sparse_volterra::adaptive::{AdaptiveAlgorithm, AdaptiveBank, LambdaSchedule};
use sparse_volterra::eval::experiment::{reference_lnl_system, REFERENCE_MEMORY, REFERENCE_ORDER};
use sparse_volterra::polymodel::lnl_expand;
use sparse_volterra::synth::{draw_sequence, rng_for, InputKind};

fn main() -> sparse_volterra::Result<()> {
    let n = 600;
    let h0 = lnl_expand(&reference_lnl_system(), REFERENCE_MEMORY, REFERENCE_ORDER)?;
    let mut rng = rng_for(5, 0);
    let seq = draw_sequence(InputKind::Gaussian, n + REFERENCE_MEMORY - 1, &mut rng);
    let x = h0.catalog().build_matrix_from_sequence(&seq)?;
    let noise = draw_sequence(InputKind::Gaussian, n, &mut rng);
    let y = x.dot(h0.values()) + ndarray::Array1::from(noise).mapv(|v| 0.1f64.sqrt() * v);

    let algs = [
        AdaptiveAlgorithm::Rls,
        AdaptiveAlgorithm::CcdRl { schedule: LambdaSchedule::RL_DEFAULT },
        AdaptiveAlgorithm::CcdRwl { schedule: LambdaSchedule::RWL_DEFAULT },
    ];
    let mut bank = AdaptiveBank::new(h0.catalog().len(), 1.0, 1.0, &algs)?;
    println!("{:>5} {:>10} {:>10} {:>10}", "N", "rls", "ccd-rl", "ccd-rwl");
    for (row, &yn) in x.rows().into_iter().zip(y.iter()) {
        bank.step(row, yn)?;
        if bank.samples() % 100 == 0 {
            let e: Vec<f64> = (0..algs.len())
                .map(|k| (bank.estimate(k) - h0.values()).mapv(|d| d * d).sum())
                .collect();
            println!("{:>5} {:>10.4} {:>10.4} {:>10.4}", bank.samples(), e[0], e[1], e[2]);
        }
    }
    Ok(())
}
