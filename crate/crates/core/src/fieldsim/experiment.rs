//! Multiple-testing experiments on simulated torus fields: rejection sets,
//! family-wise error rates, and the threshold comparison across bandwidths.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use super::field::{TorusField, TorusFieldConfig};
use crate::error::{Error, Result};
use crate::phi::PhiFunction;
use crate::resampling::{
    resampled_distributions, scheme_constants, EngineConfig, ResampledDistribution, WeightScheme,
};
use crate::sample::{MeanVector, Sample};
use crate::scalar::Real;
use crate::seed::derive_seed;
use crate::thresholds::{
    bonferroni_threshold, chain_from_distributions, compound_threshold, conc_gaussian_threshold,
    single_test_threshold, Direction, LevelSpec, Sided,
};

const TAG_ENGINE: u64 = 0x656e_6769_6e65;
const TAG_ORACLE: u64 = 0x6f72_6163_6c65;
const TAG_FWER: u64 = 0x6677_6572;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExperimentMethod {
    Bonferroni,
    SingleTest,
    Conc,
    Compound,
    QuantBonf,
    QuantConc,
    OracleQuantile,
}

impl ExperimentMethod {
    pub const ALL: [ExperimentMethod; 7] = [
        ExperimentMethod::Bonferroni,
        ExperimentMethod::SingleTest,
        ExperimentMethod::Conc,
        ExperimentMethod::Compound,
        ExperimentMethod::QuantBonf,
        ExperimentMethod::QuantConc,
        ExperimentMethod::OracleQuantile,
    ];

    pub fn tag(&self) -> &'static str {
        match self {
            ExperimentMethod::Bonferroni => "bonferroni",
            ExperimentMethod::SingleTest => "single_test",
            ExperimentMethod::Conc => "conc",
            ExperimentMethod::Compound => "compound",
            ExperimentMethod::QuantBonf => "quant_bonf",
            ExperimentMethod::QuantConc => "quant_conc",
            ExperimentMethod::OracleQuantile => "oracle_quantile",
        }
    }

    /// Whether the threshold depends on a resampling pass over the sample.
    pub fn uses_engine(&self) -> bool {
        matches!(
            self,
            ExperimentMethod::Conc
                | ExperimentMethod::Compound
                | ExperimentMethod::QuantBonf
                | ExperimentMethod::QuantConc
        )
    }

    /// Thresholds with a non-asymptotic level-α guarantee.
    pub fn guaranteed(&self) -> bool {
        !matches!(self, ExperimentMethod::SingleTest | ExperimentMethod::OracleQuantile)
    }
}

impl fmt::Display for ExperimentMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for ExperimentMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let alias = match s {
            "quant+bonf" => "quant_bonf",
            "quant+conc" => "quant_conc",
            "oracle" => "oracle_quantile",
            other => other,
        };
        ExperimentMethod::ALL
            .into_iter()
            .find(|m| m.tag() == alias)
            .ok_or_else(|| Error::invalid(format!("unknown experiment method {s:?}")))
    }
}

/// Which thresholds to compute on each sample, and how.
///
/// The noise has unit marginal variance, so every method receives `σ ≡ 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdPlan {
    pub methods: Vec<ExperimentMethod>,
    /// `alpha`, `delta` for the compound and chain thresholds, and the chain
    /// levels; the trailing bound gets `alpha − Σ alphas`.
    pub level: LevelSpec,
    pub sided: Sided,
    /// Rademacher Monte Carlo draws per sample.
    pub draws: usize,
    /// Fresh fields used for the oracle quantile.
    pub oracle_samples: usize,
}

impl ThresholdPlan {
    pub fn new(methods: Vec<ExperimentMethod>, alpha: f64, sided: Sided, draws: usize) -> Self {
        Self {
            methods,
            level: LevelSpec::default_chain(alpha),
            sided,
            draws,
            oracle_samples: 1000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            return Err(Error::invalid("at least one method is required"));
        }
        self.level.validate()?;
        let needs_chain = self
            .methods
            .iter()
            .any(|m| matches!(m, ExperimentMethod::QuantBonf | ExperimentMethod::QuantConc));
        let needs_delta = needs_chain || self.methods.contains(&ExperimentMethod::Compound);
        if needs_delta && self.level.delta.is_none() {
            return Err(Error::invalid("compound and quantile thresholds need δ"));
        }
        if needs_chain {
            if self.level.alphas.is_empty() {
                return Err(Error::invalid("quantile thresholds need at least one chain level"));
            }
            if self.level.trailing_level() <= 0.0 {
                return Err(Error::invalid("the chain levels leave no budget for the trailing bound"));
            }
        }
        if self.methods.iter().any(|m| m.uses_engine()) && self.draws == 0 {
            return Err(Error::invalid("engine draws must be positive"));
        }
        if self.methods.contains(&ExperimentMethod::OracleQuantile) && self.oracle_samples < 2 {
            return Err(Error::invalid("the oracle quantile needs at least two samples"));
        }
        Ok(())
    }

    /// The `φ` whose exceedance the thresholds control.
    pub fn phi(&self) -> PhiFunction {
        match self.sided {
            Sided::One => PhiFunction::SUP,
            Sided::Two => PhiFunction::SUP_ABS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MethodThreshold<T> {
    pub method: ExperimentMethod,
    pub value: T,
    /// Monte Carlo standard error of the expectation term, when there is one.
    pub engine_stderr: Option<f64>,
}

/// `{k : Ȳ_k > t}` one-sided, `{k : |Ȳ_k| > t}` two-sided (0-based).
pub fn reject_set<T: Real>(sample: &Sample<T>, threshold: T, sided: Sided) -> Vec<usize> {
    reject_set_from_mean(&sample.empirical_mean(), threshold, sided)
}

pub fn reject_set_from_mean<T: Real>(mean: &MeanVector<T>, threshold: T, sided: Sided) -> Vec<usize> {
    mean.values()
        .iter()
        .enumerate()
        .filter(|(_, &y)| match sided {
            Sided::One => y > threshold,
            Sided::Two => y.abs() > threshold,
        })
        .map(|(k, _)| k)
        .collect()
}

/// Empirical `(1−α)`-quantile of `φ(Ȳ − μ)` from `count` fresh samples,
/// using that `Ȳ − μ` has the law of one field divided by `√n`.
pub fn oracle_quantile<T: Real>(
    field: &TorusField<T>,
    n: usize,
    phi: &PhiFunction,
    alpha: f64,
    count: usize,
    seed: u64,
) -> Result<T> {
    if count < 2 {
        return Err(Error::invalid("the oracle quantile needs at least two samples"));
    }
    let k = field.k();
    let scale = T::one() / T::lit((n as f64).sqrt());
    let values: Vec<T> = field
        .fields(seed, count)
        .chunks_exact(k)
        .map(|g| phi.eval_unchecked(g) * scale)
        .collect();
    ResampledDistribution::new(values, false).upper_quantile(alpha)
}

/// Every threshold of `plan` for one sample, from a single engine pass.
/// `oracle` supplies the oracle quantile when that method is requested.
pub fn sample_thresholds<T: Real>(
    sample: &Sample<T>,
    plan: &ThresholdPlan,
    engine_seed: u64,
    oracle: Option<T>,
) -> Result<Vec<MethodThreshold<T>>> {
    let n = sample.len();
    let k = sample.dim();
    let alpha = plan.level.alpha;
    let one = T::one();
    let phi = plan.phi();

    let engine = if plan.methods.iter().any(|m| m.uses_engine()) {
        let scheme = WeightScheme::rademacher(n)?;
        let phis: Vec<PhiFunction> = if phi == PhiFunction::SUP_ABS {
            vec![phi]
        } else {
            vec![phi, PhiFunction::SUP_ABS]
        };
        let cfg = EngineConfig::monte_carlo(plan.draws, engine_seed);
        let dists = resampled_distributions(&sample.center_columns(), &scheme, &phis, &cfg)?;
        Some((scheme_constants(&scheme)?, dists))
    } else {
        None
    };
    let engine_parts = || {
        let (c, d) = engine.as_ref().expect("engine pass");
        (c, &d[0], d.last().unwrap())
    };

    let mut out = Vec::with_capacity(plan.methods.len());
    for &method in &plan.methods {
        let (value, engine_stderr) = match method {
            ExperimentMethod::Bonferroni => {
                (bonferroni_threshold(one, n, k, alpha, plan.sided)?.value, None)
            }
            ExperimentMethod::SingleTest => {
                (single_test_threshold(one, n, alpha, plan.sided)?.value, None)
            }
            ExperimentMethod::Conc => {
                let (c, main, _) = engine_parts();
                let e = main.expectation();
                let t = conc_gaussian_threshold(e.value, c, one, n, alpha, Direction::Upper)?;
                (t.value, Some(e.stderr.to_f64_lossy() / c.b.value))
            }
            ExperimentMethod::Compound => {
                let (c, main, _) = engine_parts();
                let delta = plan.level.delta.expect("validated");
                let t_det =
                    bonferroni_threshold(one, n, k, alpha * (1.0 - delta), plan.sided)?.value;
                let e = main.expectation();
                let t = compound_threshold(e.value, c, one, n, alpha, delta, t_det)?;
                (t.value, Some(e.stderr.to_f64_lossy() / c.b.value))
            }
            ExperimentMethod::QuantBonf | ExperimentMethod::QuantConc => {
                let (c, _, abs) = engine_parts();
                let trailing = plan.level.trailing_level();
                let f = if method == ExperimentMethod::QuantBonf {
                    bonferroni_threshold(one, n, k, trailing, Sided::Two)?.value
                } else {
                    let e = abs.expectation().value;
                    conc_gaussian_threshold(e, c, one, n, trailing, Direction::Upper)?.value
                };
                (chain_from_distributions(abs, abs, n, &plan.level, f)?, None)
            }
            ExperimentMethod::OracleQuantile => (
                oracle.ok_or_else(|| Error::invalid("oracle quantile value not supplied"))?,
                None,
            ),
        };
        out.push(MethodThreshold {
            method,
            value,
            engine_stderr,
        });
    }
    Ok(out)
}

/// One row of a family-wise error estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct FwerRow {
    pub method: ExperimentMethod,
    pub trials: usize,
    /// Fraction of trials rejecting at least one true null.
    pub rate: f64,
    pub stderr: f64,
    /// Fraction of trials with `φ(Ȳ − μ) > t`.
    pub exceedance: f64,
    pub exceedance_stderr: f64,
    pub mean_threshold: f64,
}

fn binomial_stderr(p: f64, trials: usize) -> f64 {
    (p * (1.0 - p) / trials as f64).sqrt()
}

/// The true nulls: `μ_k ≤ 0` one-sided, `μ_k = 0` two-sided.
pub fn null_set<T: Real>(mu: &MeanVector<T>, sided: Sided) -> Vec<bool> {
    mu.values()
        .iter()
        .map(|&m| match sided {
            Sided::One => m <= T::zero(),
            Sided::Two => m == T::zero(),
        })
        .collect()
}

fn check_trials(trials: usize) -> Result<()> {
    if trials < 100 {
        return Err(Error::invalid(format!("at least 100 trials are required, got {trials}")));
    }
    Ok(())
}

/// Family-wise error rate of every method of `plan` over `trials` independent
/// samples of `config`. Trial `i` depends only on `(config.seed, i)`.
pub fn estimate_fwer<T: Real>(
    config: &TorusFieldConfig,
    mu: &MeanVector<T>,
    plan: &ThresholdPlan,
    trials: usize,
) -> Result<Vec<FwerRow>> {
    config.validate()?;
    plan.validate()?;
    check_trials(trials)?;
    let field = TorusField::<T>::new(config.m, config.b)?;
    if mu.len() != field.k() {
        return Err(Error::DimensionMismatch {
            expected: field.k(),
            got: mu.len(),
        });
    }
    let nulls = null_set(mu, plan.sided);
    let phi = plan.phi();
    let oracle = if plan.methods.contains(&ExperimentMethod::OracleQuantile) {
        Some(oracle_quantile(
            &field,
            config.n,
            &phi,
            plan.level.alpha,
            plan.oracle_samples,
            derive_seed(config.seed, &[TAG_ORACLE]),
        )?)
    } else {
        None
    };

    let outcomes: Vec<Vec<(bool, bool, f64)>> = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let y = field.sample(config.n, mu, derive_seed(config.seed, &[TAG_FWER, i]))?;
            let mean = y.empirical_mean();
            let dev: Vec<T> = mean.values().iter().zip(mu.values()).map(|(&a, &b)| a - b).collect();
            let stat = phi.eval_unchecked(&dev);
            let ts = sample_thresholds(&y, plan, derive_seed(config.seed, &[TAG_ENGINE, i]), oracle)?;
            Ok(ts
                .iter()
                .map(|t| {
                    let false_reject = reject_set_from_mean(&mean, t.value, plan.sided)
                        .into_iter()
                        .any(|k| nulls[k]);
                    (false_reject, stat > t.value, t.value.to_f64_lossy())
                })
                .collect())
        })
        .collect::<Result<_>>()?;

    Ok(plan
        .methods
        .iter()
        .enumerate()
        .map(|(j, &method)| {
            let tf = trials as f64;
            let rate = outcomes.iter().filter(|o| o[j].0).count() as f64 / tf;
            let exceedance = outcomes.iter().filter(|o| o[j].1).count() as f64 / tf;
            FwerRow {
                method,
                trials,
                rate,
                stderr: binomial_stderr(rate, trials),
                exceedance,
                exceedance_stderr: binomial_stderr(exceedance, trials),
                mean_threshold: outcomes.iter().map(|o| o[j].2).sum::<f64>() / tf,
            }
        })
        .collect())
}

/// Family-wise error rate of a fixed threshold `t`, as `(rate, stderr)`.
pub fn estimate_fwer_fixed<T: Real>(
    config: &TorusFieldConfig,
    mu: &MeanVector<T>,
    threshold: T,
    sided: Sided,
    trials: usize,
) -> Result<(f64, f64)> {
    config.validate()?;
    check_trials(trials)?;
    if threshold.is_nan() {
        return Err(Error::invalid("threshold is NaN"));
    }
    let field = TorusField::<T>::new(config.m, config.b)?;
    let nulls = null_set(mu, sided);
    let hits = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let y = field.sample(config.n, mu, derive_seed(config.seed, &[TAG_FWER, i]))?;
            Ok(reject_set(&y, threshold, sided).into_iter().any(|k| nulls[k]))
        })
        .collect::<Result<Vec<bool>>>()?;
    let rate = hits.iter().filter(|&&h| h).count() as f64 / trials as f64;
    Ok((rate, binomial_stderr(rate, trials)))
}

/// Bandwidths, replications and thresholds of a comparison run.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentGrid {
    pub b_values: Vec<f64>,
    pub reps: usize,
    pub plan: ThresholdPlan,
}

impl ExperimentGrid {
    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::invalid("at least one replication is required"));
        }
        if self.b_values.is_empty() {
            return Err(Error::invalid("the bandwidth grid is empty"));
        }
        if let Some(b) = self.b_values.iter().find(|b| !(b.is_finite() && **b >= 0.0)) {
            return Err(Error::invalid(format!("bandwidth b must be finite and ≥ 0, got {b}")));
        }
        self.plan.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub b: f64,
    pub method: ExperimentMethod,
    pub mean: f64,
    /// Standard deviation across replications.
    pub sd: f64,
    pub engine_draws: Option<usize>,
    pub seed: u64,
    /// Average Monte Carlo standard error of the expectation term.
    pub engine_stderr: Option<f64>,
}

/// Average thresholds over `grid.reps` simulated samples for each bandwidth.
/// Rows are ordered by `b`, then by method in plan order.
pub fn run_threshold_comparison<T: Real>(
    grid: &ExperimentGrid,
    m: usize,
    n: usize,
    master_seed: u64,
) -> Result<Vec<ComparisonRow>> {
    grid.validate()?;
    let plan = &grid.plan;
    let mut rows = Vec::with_capacity(grid.b_values.len() * plan.methods.len());
    for &b in &grid.b_values {
        TorusFieldConfig::new(m, b, n, master_seed)?;
        let field = TorusField::<T>::new(m, b)?;
        let mu = MeanVector::constant(field.k(), T::zero());
        let bkey = b.to_bits();
        let oracle = if plan.methods.contains(&ExperimentMethod::OracleQuantile) {
            Some(oracle_quantile(
                &field,
                n,
                &plan.phi(),
                plan.level.alpha,
                plan.oracle_samples,
                derive_seed(master_seed, &[bkey, TAG_ORACLE]),
            )?)
        } else {
            None
        };
        let reps: Vec<Vec<MethodThreshold<T>>> = (0..grid.reps as u64)
            .into_par_iter()
            .map(|r| {
                let y = field.sample(n, &mu, derive_seed(master_seed, &[bkey, r]))?;
                sample_thresholds(&y, plan, derive_seed(master_seed, &[bkey, r, TAG_ENGINE]), oracle)
            })
            .collect::<Result<_>>()?;

        for (j, &method) in plan.methods.iter().enumerate() {
            let vals: Vec<f64> = reps.iter().map(|r| r[j].value.to_f64_lossy()).collect();
            let rf = vals.len() as f64;
            let mean = vals.iter().sum::<f64>() / rf;
            let sd = if vals.len() > 1 {
                (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (rf - 1.0)).sqrt()
            } else {
                0.0
            };
            let engine_stderr = reps
                .iter()
                .map(|r| r[j].engine_stderr)
                .sum::<Option<f64>>()
                .map(|s| s / rf);
            rows.push(ComparisonRow {
                b,
                method,
                mean,
                sd,
                engine_draws: method.uses_engine().then_some(plan.draws),
                seed: master_seed,
                engine_stderr,
            });
        }
    }
    Ok(rows)
}
