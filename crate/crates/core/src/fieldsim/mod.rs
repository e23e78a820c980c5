//! Gaussian fields on the discrete torus and the multiple-testing
//! experiments run on them.

mod experiment;
mod fft;
mod field;

pub use experiment::{
    estimate_fwer, estimate_fwer_fixed, null_set, oracle_quantile, reject_set,
    reject_set_from_mean, run_threshold_comparison, sample_thresholds, ComparisonRow,
    ExperimentGrid, ExperimentMethod, FwerRow, MethodThreshold, ThresholdPlan,
};
pub use field::{gaussian_filter, generate_sample, torus_dist2, TorusField, TorusFieldConfig};
