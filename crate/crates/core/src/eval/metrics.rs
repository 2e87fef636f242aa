use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polymodel::CoefficientVector;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupportMetrics {
    pub nnz: usize,
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub f1: f64,
    /// `||h_true - h_est||^2`.
    pub sq_error: f64,
}

/// Compares supports `{i : |h_i| > threshold}` of an estimate and the truth.
/// An empty true support matched by an empty estimate scores `F1 = 1`.
pub fn support_metrics(h_est: &CoefficientVector, h_true: &CoefficientVector, threshold: f64) -> Result<SupportMetrics> {
    if **h_est.catalog() != **h_true.catalog() {
        return Err(Error::CatalogMismatch("estimate and truth use different catalogs".into()));
    }
    let est = h_est.values();
    let tru = h_true.values();
    let (mut tp, mut fp, mut fneg) = (0, 0, 0);
    for (e, t) in est.iter().zip(tru.iter()) {
        match (e.abs() > threshold, t.abs() > threshold) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fneg += 1,
            (false, false) => {}
        }
    }
    let f1 = if tp + fp + fneg == 0 {
        1.0
    } else {
        2.0 * tp as f64 / (2 * tp + fp + fneg) as f64
    };
    let sq_error = est.iter().zip(tru.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(SupportMetrics {
        nnz: tp + fp,
        true_positives: tp,
        false_positives: fp,
        false_negatives: fneg,
        f1,
        sq_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polymodel::{enumerate_basis, ModelKind};
    use ndarray::array;
    use std::sync::Arc;

    #[test]
    fn metric_cases() {
        let cat = Arc::new(enumerate_basis(3, 1, ModelKind::Volterra).unwrap());
        let t = CoefficientVector::new(cat.clone(), array![0.0, 1.0, 0.0, -2.0]).unwrap();
        let same = support_metrics(&t, &t, 0.0).unwrap();
        assert_eq!((same.f1, same.false_positives, same.sq_error), (1.0, 0, 0.0));
        let zero = CoefficientVector::zeros(cat.clone());
        assert_eq!(support_metrics(&zero, &t, 0.0).unwrap().f1, 0.0);
        let e = CoefficientVector::new(cat.clone(), array![0.05, 0.9, 0.2, 0.0]).unwrap();
        let m = support_metrics(&e, &t, 0.1).unwrap();
        assert_eq!((m.true_positives, m.false_positives, m.false_negatives), (1, 1, 1));
        assert_eq!(m.nnz, 2);
        assert!((m.f1 - 0.5).abs() < 1e-15);
        let other = CoefficientVector::zeros(Arc::new(enumerate_basis(3, 1, ModelKind::Multilinear).unwrap()));
        assert!(support_metrics(&other, &t, 0.0).is_err());
    }
}
