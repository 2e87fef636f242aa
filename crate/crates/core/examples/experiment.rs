//! A short Monte Carlo run of the batch benchmark scenario.
//!
//! ```text
//! cargo run --release --example experiment -- out/
//! ```

use sparse_volterra::eval::experiment::{mc_mse_experiment, ExperimentConfig, Scenario};

fn main() -> sparse_volterra::Result<()> {
    let cfg = ExperimentConfig {
        runs: 5,
        n_grid: vec![100, 300, 600],
        ..ExperimentConfig::preset(Scenario::Fig1Batch)
    };
    let out = mc_mse_experiment(&cfg)?;
    for row in out.summary() {
        println!("{:>7} N={:<4} {} = {:.4} +- {:.4}", row.estimator, row.n, row.metric, row.mean, row.std_err);
    }
    if let Some(dir) = std::env::args().nth(1) {
        out.write_to(std::path::Path::new(&dir))?;
    }
    Ok(())
}
