//! Threshold formulas: Bonferroni, Gaussian and bounded concentration,
//! compound, quantile chain, plus the special functions they rely on.

mod binomial;
mod chain;
mod formulas;
mod report;
mod special;

pub use binomial::{binom_upper_quantile, gamma_coeffs};
pub use chain::{chain_from_distributions, quantile_chain_threshold, TrailingBound};
pub use formulas::{
    bonferroni_threshold, compound_threshold, conc_bounded_thresholds, conc_gaussian_threshold,
    lp_risk_interval, single_test_threshold, BoundedAssumption,
};
pub use report::{
    CompoundBranch, Direction, InputsDigest, LevelSpec, McMeta, Method, Sided, ThresholdReport,
};
pub use special::{inv_normal_upper, normal_density, normal_upper_tail};
