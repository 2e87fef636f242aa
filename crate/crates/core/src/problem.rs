//! Regression problems and the centering / standardization round trip.

use std::sync::Arc;

use ndarray::{Array1, Array2, Axis};

use crate::error::{Error, Result};
use crate::polymodel::{BasisCatalog, CoefficientVector, Inputs};

/// Design matrix, response and the catalog that names the columns.
#[derive(Debug, Clone)]
pub struct RegressionProblem {
    pub catalog: Arc<BasisCatalog>,
    pub x: Array2<f64>,
    pub y: Array1<f64>,
}

impl RegressionProblem {
    pub fn new(catalog: Arc<BasisCatalog>, x: Array2<f64>, y: Array1<f64>) -> Result<Self> {
        if x.ncols() != catalog.len() {
            return Err(Error::DimensionMismatch {
                expected: catalog.len(),
                got: x.ncols(),
            });
        }
        if x.nrows() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: x.nrows(),
                got: y.len(),
            });
        }
        Ok(RegressionProblem { catalog, x, y })
    }

    /// Builds `X` from raw inputs with `catalog` and attaches `y`.
    pub fn from_inputs(catalog: Arc<BasisCatalog>, inputs: &Inputs, y: Array1<f64>) -> Result<Self> {
        let x = catalog.build_matrix(inputs)?;
        Self::new(catalog, x, y)
    }

    pub fn n_samples(&self) -> usize {
        self.x.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.x.ncols()
    }

    /// Rows selected by `idx`, in that order.
    pub fn select_rows(&self, idx: &[usize]) -> RegressionProblem {
        RegressionProblem {
            catalog: self.catalog.clone(),
            x: self.x.select(Axis(0), idx),
            y: self.y.select(Axis(0), idx),
        }
    }

    /// Leading `n` rows.
    pub fn head(&self, n: usize) -> RegressionProblem {
        let n = n.min(self.n_samples());
        RegressionProblem {
            catalog: self.catalog.clone(),
            x: self.x.slice(ndarray::s![..n, ..]).to_owned(),
            y: self.y.slice(ndarray::s![..n]).to_owned(),
        }
    }

    /// `||y - X h||_2^2`.
    pub fn rss(&self, h: &Array1<f64>) -> f64 {
        let r = &self.y - &self.x.dot(h);
        r.dot(&r)
    }
}

/// Column preprocessing applied before penalized fitting.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Preprocess {
    /// Subtract sample means of `y` and of the non-intercept columns.
    pub center: bool,
    /// Scale non-intercept columns to unit l2 norm (after centering).
    pub standardize: bool,
}

impl Preprocess {
    pub const NONE: Preprocess = Preprocess {
        center: false,
        standardize: false,
    };
    pub const CENTER: Preprocess = Preprocess {
        center: true,
        standardize: false,
    };
    pub const CENTER_SCALE: Preprocess = Preprocess {
        center: true,
        standardize: true,
    };
}

/// Means and scales recorded while transforming a problem, used to map
/// coefficients back and to recover the intercept.
#[derive(Debug, Clone)]
pub struct Transform {
    pub x_means: Array1<f64>,
    pub y_mean: f64,
    pub scales: Array1<f64>,
    pub center: bool,
}

impl Transform {
    pub fn apply(problem: &RegressionProblem, opts: Preprocess) -> (RegressionProblem, Transform) {
        let m = problem.n_features();
        let icpt = problem.catalog.intercept_position();
        let mut x = problem.x.clone();
        let mut y = problem.y.clone();
        let mut x_means = Array1::zeros(m);
        let mut y_mean = 0.0;
        if opts.center {
            x_means = x.mean_axis(Axis(0)).expect("non-empty");
            y_mean = y.mean().expect("non-empty");
            for (j, mut col) in x.columns_mut().into_iter().enumerate() {
                col -= x_means[j];
            }
            y -= y_mean;
        }
        let mut scales = Array1::ones(m);
        if opts.standardize {
            for (j, mut col) in x.columns_mut().into_iter().enumerate() {
                if j == icpt {
                    continue;
                }
                let norm = col.dot(&col).sqrt();
                if norm > 0.0 {
                    col /= norm;
                    scales[j] = norm;
                }
            }
        }
        let transformed = RegressionProblem {
            catalog: problem.catalog.clone(),
            x,
            y,
        };
        (
            transformed,
            Transform {
                x_means,
                y_mean,
                scales,
                center: opts.center,
            },
        )
    }

    /// Maps coefficients fitted on the transformed problem back to the
    /// original columns. With centering, the intercept is set so the fitted
    /// model passes through the sample means.
    pub fn restore(&self, catalog: &Arc<BasisCatalog>, h_t: &Array1<f64>) -> Result<CoefficientVector> {
        let mut h = h_t / &self.scales;
        if self.center {
            let icpt = catalog.intercept_position();
            h[icpt] = 0.0;
            h[icpt] = self.y_mean - self.x_means.dot(&h);
        }
        CoefficientVector::new(catalog.clone(), h)
    }
}
