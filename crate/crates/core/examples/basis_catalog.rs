//! Enumerates small catalogs and builds a regressor row.

use sparse_volterra::polymodel::{dimension, enumerate_basis, ModelKind};

fn main() -> sparse_volterra::Result<()> {
    for kind in [ModelKind::Volterra, ModelKind::Multilinear] {
        for (l, p) in [(11, 3), (121, 2), (127, 2)] {
            println!("{kind:>12} L={l:<4} P={p}  M={}", dimension(l, p, kind)?);
        }
    }

    let cat = enumerate_basis(3, 2, ModelKind::Volterra)?;
    let row = cat.regressor_row(&[2.0, -1.0, 0.5])?;
    for (key, v) in cat.key_strings().iter().zip(row.iter()) {
        println!("{key:>6} = {v}");
    }
    Ok(())
}
