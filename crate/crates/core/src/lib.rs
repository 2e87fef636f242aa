//! Sparse Volterra and polynomial regression.
//!
//! * [`polymodel`]: non-redundant monomial catalogs, regressor rows, design
//!   matrices and LNL-cascade expansions.
//! * [`synth`]: seeded inputs, system simulation and QTL datasets.
//! * [`estimators`]: ridge (primal / dual / kernel trick) and the (weighted)
//!   Lasso by cyclic coordinate descent.
//! * [`adaptive`]: exponentially weighted RLS and the single-sweep recursive
//!   (weighted) Lasso.
//! * [`riplab`]: orthonormalized design matrices, coefficient mapping,
//!   Gershgorin certificates, exact RIP on small instances, and recovery probes.
//! * [`eval`]: cross-validation, support metrics, data loading and the
//!   experiment drivers behind the `svr` binary.

pub mod adaptive;
pub mod error;
pub mod estimators;
pub mod eval;
pub mod linalg;
pub mod polymodel;
pub mod problem;
pub mod riplab;
pub mod synth;

pub use error::{Error, Result};
pub use polymodel::{
    dimension, enumerate_basis, evaluate_model, lnl_expand, BasisCatalog, CoefficientVector, Inputs,
    LnlSystem, ModelKind, MonomialKey,
};
pub use problem::{Preprocess, RegressionProblem};
