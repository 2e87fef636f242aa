//! Cross-validation, support metrics, data ingestion and experiment drivers.

pub mod cv;
pub mod data;
pub mod experiment;
pub mod metrics;

pub use cv::{cross_validate, fold_assignment, CvEstimator, CvResult, CvSpec, Folds};
pub use data::{load_genotype_csv, read_genotype_csv, read_samples_csv, write_genotype_csv, write_matrix_csv, GenotypeData};
pub use experiment::{mc_mse_experiment, run_experiment, ExperimentConfig, ExperimentOutput, Record, Scenario};
pub use metrics::{support_metrics, SupportMetrics};
