//! Draws a random QTL layout and prints it as JSON.
//!
//! ```text
//! cargo run --example qtl_layout -- 1800015 > layout.json
//! ```
//! With no argument it reproduces the shipped default layout.

use sparse_volterra::synth::{gen_qtl, InputKind, QtlConfig, VarianceTarget};

fn main() -> sparse_volterra::Result<()> {
    let seed = std::env::args()
        .nth(1)
        .map(|s| s.parse::<u64>().expect("seed must be an integer"))
        .unwrap_or(1_800_015);
    let cfg = QtlConfig::random_layout(600, 121, 9, 13, 0.45, 0.3, 5.0, VarianceTarget::Total(10.0), InputKind::Binary, seed)?;
    let data = gen_qtl(&cfg, 1)?;
    eprintln!("noise variance for seed-1 genotypes: {:.3}", data.noise_var);
    println!("{}", serde_json::to_string_pretty(&cfg)?);
    Ok(())
}
