//! Synthetic QTL data: cross-validated ridge, Lasso and weighted Lasso with
//! support recovery against the planted effects.

use std::sync::Arc;

use sparse_volterra::estimators::{fit_estimator, CcdMode, Estimator, EstimatorConfig};
use sparse_volterra::eval::{cross_validate, support_metrics, CvEstimator, CvSpec, Folds};
use sparse_volterra::polymodel::{enumerate_basis, ModelKind};
use sparse_volterra::problem::{Preprocess, RegressionProblem};
use sparse_volterra::synth::{gen_qtl, InputKind, QtlConfig, VarianceTarget};

fn main() -> sparse_volterra::Result<()> {
    let cfg = QtlConfig::random_layout(200, 30, 4, 4, 1.0, 1.0, 5.0, VarianceTarget::Noise(1.0), InputKind::Binary, 4)?;
    let data = gen_qtl(&cfg, 1)?;
    let cat = Arc::new(enumerate_basis(cfg.markers, 2, ModelKind::Multilinear)?);
    let x = cat.build_matrix_from_samples(data.genotypes.view())?;
    let problem = RegressionProblem::new(cat.clone(), x, data.phenotype)?;
    let truth = cfg.true_coefficients(cat)?;

    let spec = |e| {
        let mut s = CvSpec::new(e, Folds::K(10));
        s.grid_points = 30;
        s
    };
    let ridge = cross_validate(&problem, &spec(CvEstimator::Ridge))?;
    let lasso = cross_validate(&problem, &spec(CvEstimator::Lasso))?;
    let wlasso = cross_validate(&problem, &spec(CvEstimator::Wlasso { delta: Some(ridge.parameter) }))?;

    let base = EstimatorConfig {
        mode: CcdMode::Auto,
        active_set: true,
        tol: 1e-6,
        ..Default::default()
    };
    for (est, pe) in [
        (Estimator::Ridge { delta: ridge.parameter }, ridge.pe),
        (Estimator::Lasso { lambda: lasso.parameter }, lasso.pe),
        (Estimator::Wlasso { lambda: wlasso.parameter, delta: ridge.parameter }, wlasso.pe),
    ] {
        let fit = fit_estimator(&problem, est, Preprocess::CENTER, &base)?;
        let m = support_metrics(&fit.h, &truth, 0.1)?;
        println!(
            "{:>7}: PE {pe:.3}  NNZ {:>4}  F1 {:.2}  ||h - h0||^2 {:.3}",
            est.name(),
            fit.h.nnz(),
            m.f1,
            m.sq_error
        );
    }
    Ok(())
}
