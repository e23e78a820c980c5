//! Resampling-based confidence regions and multiple-testing thresholds for
//! the mean of a high-dimensional vector.
//!
//! A region has the form `{μ : φ(Ȳ − μ) ≤ t_α(Y)}`. The crate provides the
//! weight schemes and their constants, a resampling engine, closed-form and
//! quantile-based thresholds, and a Gaussian torus-field simulator to
//! compare them.
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`); the `*64`
//! aliases below fix the common double-precision case.

pub mod error;
pub mod fieldsim;
pub mod phi;
pub mod resampling;
pub mod sample;
pub mod scalar;
pub mod seed;
pub mod thresholds;

pub use error::{Error, Result};
pub use phi::{PExponent, PhiFunction, PhiKind};
pub use resampling::{
    resampled_expectation, resampled_quantile, scheme_constants, EngineConfig, EngineMode,
    ResamplingConstants, SchemeKind, WeightScheme,
};
pub use sample::{MeanVector, Sample};
pub use scalar::Real;
pub use thresholds::{LevelSpec, Method, Sided, ThresholdReport};

pub type Sample64 = Sample<f64>;
pub type Sample32 = Sample<f32>;
pub type MeanVector64 = MeanVector<f64>;
pub type MeanVector32 = MeanVector<f32>;
pub type ThresholdReport64 = ThresholdReport<f64>;
pub type ThresholdReport32 = ThresholdReport<f32>;
pub type Estimate64 = resampling::Estimate<f64>;
pub type TorusField64 = fieldsim::TorusField<f64>;
