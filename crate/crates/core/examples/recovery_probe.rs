//! Sparse-recovery success rates for i.i.d. and Toeplitz designs.

use sparse_volterra::riplab::{recovery_probe, ProbeKind};

fn main() -> sparse_volterra::Result<()> {
    let ns: Vec<usize> = (2..=10).map(|k| 10 * k).collect();
    for kind in [ProbeKind::LqIid, ProbeKind::VolterraUniform] {
        let curve = recovery_probe(kind, 15, &[2, 4], &ns, 30, 9)?;
        println!("{kind:?} (M = {})", curve.m);
        for s in [2, 4] {
            let row: Vec<String> = ns
                .iter()
                .map(|&n| format!("{:.2}", curve.point(n, s).unwrap().probability))
                .collect();
            println!("  s={s}: {}", row.join(" "));
        }
    }
    Ok(())
}
