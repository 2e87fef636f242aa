//! Polynomial-kernel ridge folded onto the non-redundant catalog. In-sample
//! predictions from the folded coefficients match `K alpha`.

use std::sync::Arc;

use sparse_volterra::estimators::{kernel_gram, kernel_ridge_fit};
use sparse_volterra::linalg::Cholesky;
use sparse_volterra::polymodel::{enumerate_basis, ModelKind};
use sparse_volterra::synth::{draw_matrix, rng_for, InputKind};

fn main() -> sparse_volterra::Result<()> {
    let delta = 0.5;
    let mut rng = rng_for(11, 0);
    let u = draw_matrix(InputKind::Gaussian, 25, 3, &mut rng);
    let y = draw_matrix(InputKind::Gaussian, 25, 1, &mut rng).column(0).to_owned();
    let cat = Arc::new(enumerate_basis(3, 2, ModelKind::PolynomialIid)?);

    let h = kernel_ridge_fit(cat.clone(), u.view(), y.view(), delta)?;
    let from_catalog = cat.build_matrix_from_samples(u.view())?.dot(h.values());

    let k = kernel_gram(u.view(), 2);
    let mut reg = k.clone();
    reg.diag_mut().mapv_inplace(|v| v + delta);
    let alpha = Cholesky::factor(reg.view())?.solve(y.view());
    let from_kernel = k.dot(&alpha);

    let gap = (&from_catalog - &from_kernel).mapv(f64::abs).fold(0.0, |a: f64, b| a.max(*b));
    println!("{} catalog coefficients, max prediction gap {gap:.2e}", cat.len());
    for (key, v) in h.named().iter().take(5) {
        println!("  h[{key}] = {v:.4}");
    }
    Ok(())
}
