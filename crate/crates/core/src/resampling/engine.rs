//! The resampling engine: the conditional law of `φ(n⁻¹ Σ W_i Xⁱ)` given the
//! data, by exact enumeration of the weight support or by Monte Carlo.

use rayon::prelude::*;

use super::scheme::{SchemeKind, WeightScheme};
use super::weights::{draw_weights_into, Support};
use crate::error::{Error, Result};
use crate::phi::PhiFunction;
use crate::sample::Sample;
use crate::scalar::Real;
use crate::seed::stream_rng;

pub const DEFAULT_SUPPORT_CAP: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EngineMode {
    Exact,
    MonteCarlo { draws: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EngineConfig {
    pub mode: EngineMode,
    pub master_seed: u64,
    /// Largest support enumerated in `Exact` mode.
    pub support_cap: usize,
}

impl EngineConfig {
    pub fn exact() -> Self {
        Self {
            mode: EngineMode::Exact,
            master_seed: 0,
            support_cap: DEFAULT_SUPPORT_CAP,
        }
    }

    pub fn monte_carlo(draws: usize, master_seed: u64) -> Self {
        Self {
            mode: EngineMode::MonteCarlo { draws },
            master_seed,
            support_cap: DEFAULT_SUPPORT_CAP,
        }
    }

    pub fn with_seed(self, master_seed: u64) -> Self {
        Self {
            master_seed,
            ..self
        }
    }

    pub fn draws(&self) -> Option<usize> {
        match self.mode {
            EngineMode::Exact => None,
            EngineMode::MonteCarlo { draws } => Some(draws),
        }
    }
}

/// A resampled quantity with its Monte Carlo standard error (zero when exact).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<T> {
    pub value: T,
    pub stderr: T,
}

/// Equally weighted atoms of a conditional law: every support point in exact
/// mode, or every draw in Monte Carlo mode.
#[derive(Debug, Clone, PartialEq)]
pub struct ResampledDistribution<T> {
    values: Vec<T>,
    exact: bool,
}

impl<T: Real> ResampledDistribution<T> {
    pub fn new(values: Vec<T>, exact: bool) -> Self {
        Self { values, exact }
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn is_exact(&self) -> bool {
        self.exact
    }

    /// Mean over atoms; the standard error is zero for an exact law.
    pub fn expectation(&self) -> Estimate<T> {
        let n = T::lit(self.values.len() as f64);
        let mean = self.values.iter().copied().sum::<T>() / n;
        if self.exact || self.values.len() < 2 {
            return Estimate {
                value: mean,
                stderr: T::zero(),
            };
        }
        let ss: T = self.values.iter().map(|&v| (v - mean) * (v - mean)).sum();
        let var = ss / (n - T::one());
        Estimate {
            value: mean,
            stderr: (var / n).sqrt(),
        }
    }

    /// `inf{x : P(V > x) ≤ α}`: the smallest atom whose strict exceedance
    /// mass is at most `α`. Ties are counted, never interpolated.
    pub fn upper_quantile(&self, alpha: f64) -> Result<T> {
        check_level(alpha)?;
        let mut sorted = self.values.clone();
        sorted.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite resampled values"));
        let total = sorted.len();
        let budget = alpha * total as f64;
        let mut j = 0;
        while j < total {
            let x = sorted[j];
            let mut end = j + 1;
            while end < total && sorted[end] == x {
                end += 1;
            }
            if ((total - end) as f64) <= budget {
                return Ok(x);
            }
            j = end;
        }
        unreachable!("the largest atom has zero exceedance mass")
    }

    /// `P(V > x)` under the atom law.
    pub fn exceedance(&self, x: T) -> f64 {
        self.values.iter().filter(|&&v| v > x).count() as f64 / self.values.len() as f64
    }

    /// `P(V ≥ x)` under the atom law.
    pub fn exceedance_or_equal(&self, x: T) -> f64 {
        self.values.iter().filter(|&&v| v >= x).count() as f64 / self.values.len() as f64
    }
}

pub(crate) fn check_level(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("level must lie in (0, 1), got {alpha}")))
    }
}

/// Evaluates `φ_j(n⁻¹ Σ_i W_i Xⁱ)` for every `φ_j` in `phis` over the scheme's
/// support (exact) or over independent draws (Monte Carlo), where `X` is
/// `data` taken as given.
///
/// Monte Carlo draw `d` uses stream `d` of `cfg.master_seed`, and results are
/// stored by draw index, so the output does not depend on the thread count.
pub fn resampled_distributions<T: Real>(
    data: &Sample<T>,
    scheme: &WeightScheme,
    phis: &[PhiFunction],
    cfg: &EngineConfig,
) -> Result<Vec<ResampledDistribution<T>>> {
    let n = data.len();
    if scheme.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: scheme.n(),
        });
    }
    let k = data.dim();
    let nphi = phis.len();
    let inv_n = T::one() / T::lit(n as f64);
    let cols = data.as_column_major();

    let project = |w: &[f64], acc: &mut Vec<T>, slot: &mut [T]| {
        acc.iter_mut().for_each(|a| *a = T::zero());
        for (i, &wi) in w.iter().enumerate() {
            if wi == 0.0 {
                continue;
            }
            let wt = T::lit(wi);
            for (a, &x) in acc.iter_mut().zip(&cols[i * k..(i + 1) * k]) {
                *a = *a + wt * x;
            }
        }
        acc.iter_mut().for_each(|a| *a = *a * inv_n);
        for (s, phi) in slot.iter_mut().zip(phis) {
            *s = phi.eval_unchecked(acc);
        }
    };

    let (atoms, exact) = match cfg.mode {
        EngineMode::Exact => (Some(Support::new(scheme, cfg.support_cap)?), true),
        EngineMode::MonteCarlo { draws } => {
            if draws == 0 {
                return Err(Error::invalid("Monte Carlo mode needs at least one draw"));
            }
            (None, false)
        }
    };
    let count = match (&atoms, cfg.mode) {
        (Some(s), _) => s.len(),
        (None, EngineMode::MonteCarlo { draws }) => draws,
        _ => unreachable!(),
    };

    let mut out = vec![T::zero(); count * nphi];
    out.par_chunks_mut(nphi.max(1))
        .enumerate()
        .for_each_init(
            || (vec![T::zero(); k], vec![0.0f64; n]),
            |(acc, w), (d, slot)| {
                match &atoms {
                    Some(s) => s.atom_into(d, w),
                    None => draw_weights_into(scheme, &mut stream_rng(cfg.master_seed, d as u64), w),
                }
                project(w, acc, slot);
            },
        );

    Ok((0..nphi)
        .map(|j| {
            ResampledDistribution::new(out.iter().skip(j).step_by(nphi).copied().collect(), exact)
        })
        .collect())
}

/// `E[φ(Ȳ_[W−W̄]) | Y]`, with `Ȳ_[W−W̄] = n⁻¹ Σ (W_i − W̄) Yⁱ`.
///
/// Computed as `n⁻¹ Σ W_i (Yⁱ − Ȳ)`, the same vector; the result is unchanged
/// when every column is shifted by a common vector.
pub fn resampled_expectation<T: Real>(
    sample: &Sample<T>,
    scheme: &WeightScheme,
    phi: &PhiFunction,
    cfg: &EngineConfig,
) -> Result<Estimate<T>> {
    let centered = sample.center_columns();
    let dist = resampled_distributions(&centered, scheme, std::slice::from_ref(phi), cfg)?;
    Ok(dist[0].expectation())
}

/// The resampled quantile `q_α(φ, X) = inf{x : P_W(φ(X̄_[W]) > x) ≤ α}` under
/// Rademacher weights, for the data `X` exactly as passed (callers center it
/// when they want `q_α(φ, Y − Ȳ)`).
pub fn resampled_quantile<T: Real>(
    data: &Sample<T>,
    scheme: &WeightScheme,
    phi: &PhiFunction,
    alpha: f64,
    cfg: &EngineConfig,
) -> Result<T> {
    check_quantile_inputs(scheme, phi)?;
    check_level(alpha)?;
    let dist = resampled_distributions(data, scheme, std::slice::from_ref(phi), cfg)?;
    dist[0].upper_quantile(alpha)
}

pub(crate) fn check_quantile_inputs(scheme: &WeightScheme, phi: &PhiFunction) -> Result<()> {
    if scheme.kind() != SchemeKind::Rademacher {
        return Err(Error::Unsupported(format!(
            "resampled quantiles are defined for Rademacher weights only, got {scheme}"
        )));
    }
    if !phi.nonnegative() {
        return Err(Error::Unsupported(format!(
            "resampled quantile needs a nonnegative φ, got {phi}"
        )));
    }
    Ok(())
}
