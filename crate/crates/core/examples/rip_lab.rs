//! Modified Volterra matrix: moments, Gershgorin certificate versus exact
//! RIP constants, and the sample-size bound.

use sparse_volterra::riplab::{
    brute_force_rip, build_modified_volterra, modified_moments, volterra_rip_bound, RipCertificate,
};
use sparse_volterra::synth::{draw_sequence, rng_for, InputKind};

fn main() -> sparse_volterra::Result<()> {
    let (l, n) = (8, 400);
    let m = modified_moments(l, n, 20, 1)?;
    println!(
        "mean diag deviation {:.4}, max off-diagonal {:.4} ({} realizations)",
        m.mean_diag_deviation, m.max_offdiag, m.realizations
    );

    let seq = draw_sequence(InputKind::Uniform, n + l - 1, &mut rng_for(2, 0));
    let xm = build_modified_volterra(&seq, l, n)?;
    let cert = RipCertificate::from_grammian(xm.grammian().view(), 3);
    for (s, bound) in &cert.certified {
        let exact = brute_force_rip(xm.matrix.view(), *s)?;
        match bound {
            Some(b) => println!("s={s}: certificate {b:.4} >= exact {exact:.4}"),
            None => println!("s={s}: not certified, exact {exact:.4}"),
        }
    }

    let b = volterra_rip_bound(30, 4, 0.5, 0.5, None)?;
    println!("L=30, s=4: N >= {:.0} suffices", b.n_min);
    Ok(())
}
