//! Resampling weight laws, their constants, and the conditional resampling
//! engine.

mod constants;
mod engine;
mod scheme;
mod weights;

pub use constants::{
    estimate_constant_mc, scheme_constants, table_bounds, Accuracy, Constant, ConstantName,
    ResamplingConstants,
};
pub use engine::{
    resampled_distributions, resampled_expectation, resampled_quantile, EngineConfig, EngineMode,
    Estimate, ResampledDistribution, DEFAULT_SUPPORT_CAP,
};
pub(crate) use engine::check_quantile_inputs;
pub use scheme::{SchemeKind, SchemeSpec, WeightScheme};
pub use weights::{draw_weights, draw_weights_into, draw_weights_seeded, Support};
