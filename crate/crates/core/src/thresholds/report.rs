use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::resampling::{ConstantName, ResamplingConstants};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Bonferroni,
    SingleTest,
    ConcGaussian,
    ConcBounded,
    Compound,
    QuantileChain,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Bonferroni,
        Method::SingleTest,
        Method::ConcGaussian,
        Method::ConcBounded,
        Method::Compound,
        Method::QuantileChain,
    ];

    pub fn tag(&self) -> &'static str {
        match self {
            Method::Bonferroni => "bonferroni",
            Method::SingleTest => "single_test",
            Method::ConcGaussian => "conc_gaussian",
            Method::ConcBounded => "conc_bounded",
            Method::Compound => "compound",
            Method::QuantileChain => "quantile_chain",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.tag() == s.trim())
            .ok_or_else(|| Error::invalid(format!("unknown threshold method {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Sided {
    One,
    #[default]
    Two,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Direction {
    #[default]
    Upper,
    Lower,
}

/// How a level budget `α` is spent.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LevelSpec {
    pub alpha: f64,
    /// Split parameter of the compound and quantile-chain constructions.
    pub delta: Option<f64>,
    /// `(α₀, …, α_{J−1})` of the quantile chain.
    pub alphas: Vec<f64>,
}

impl LevelSpec {
    pub fn single(alpha: f64) -> Self {
        Self {
            alpha,
            ..Self::default()
        }
    }

    pub fn split(alpha: f64, delta: f64) -> Self {
        Self {
            alpha,
            delta: Some(delta),
            alphas: Vec::new(),
        }
    }

    /// The chain split used in the simulations: `J = 1`, `α₀ = 0.9α`,
    /// `δ = 0.1`, leaving `0.1α` for the trailing bound.
    pub fn default_chain(alpha: f64) -> Self {
        Self {
            alpha,
            delta: Some(0.1),
            alphas: vec![0.9 * alpha],
        }
    }

    /// Budget left for the trailing bound of a quantile chain.
    pub fn trailing_level(&self) -> f64 {
        self.alpha - self.alphas.iter().sum::<f64>()
    }

    pub fn validate(&self) -> Result<()> {
        let in_unit = |x: f64| x > 0.0 && x < 1.0;
        if !in_unit(self.alpha) {
            return Err(Error::invalid(format!("α must lie in (0, 1), got {}", self.alpha)));
        }
        if let Some(d) = self.delta {
            if !in_unit(d) {
                return Err(Error::invalid(format!("δ must lie in (0, 1), got {d}")));
            }
        }
        if let Some(a) = self.alphas.iter().find(|&&a| !in_unit(a)) {
            return Err(Error::invalid(format!("α_i must lie in (0, 1), got {a}")));
        }
        if self.alphas.iter().sum::<f64>() > self.alpha * (1.0 + 1e-12) {
            return Err(Error::invalid(format!(
                "Σ α_i = {} exceeds the overall level {}",
                self.alphas.iter().sum::<f64>(),
                self.alpha
            )));
        }
        Ok(())
    }
}

/// Which side of `min(Eq. (6), t_det)` produced a compound threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompoundBranch {
    Concentration,
    Deterministic,
}

/// Monte Carlo provenance of a data-dependent threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McMeta {
    /// `None` for exact enumeration.
    pub draws: Option<usize>,
    pub seed: u64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct InputsDigest {
    pub n: usize,
    pub k: Option<usize>,
    pub sigma_norm: Option<f64>,
    /// True when σ was estimated from the data instead of being a known bound.
    pub sigma_plug_in: bool,
    pub scheme: Option<String>,
    pub constants: Vec<(ConstantName, f64)>,
}

impl InputsDigest {
    pub(crate) fn with_constants(mut self, c: &ResamplingConstants, names: &[ConstantName]) -> Self {
        self.constants = names
            .iter()
            .filter_map(|&nm| c.get(nm).map(|v| (nm, v.value)))
            .collect();
        self
    }
}

/// A threshold `t_α(Y)` and everything needed to reproduce it.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdReport<T> {
    pub value: T,
    pub method: Method,
    pub direction: Direction,
    pub level: LevelSpec,
    /// Level at which the threshold is guaranteed (`Σ α_i + level(f)` for the
    /// chain, `α` otherwise).
    pub guaranteed_level: f64,
    pub inputs: InputsDigest,
    pub mc: Option<McMeta>,
    pub branch: Option<CompoundBranch>,
}

impl<T> ThresholdReport<T> {
    pub(crate) fn new(value: T, method: Method, level: LevelSpec, inputs: InputsDigest) -> Self {
        let guaranteed_level = level.alpha;
        Self {
            value,
            method,
            direction: Direction::Upper,
            level,
            guaranteed_level,
            inputs,
            mc: None,
            branch: None,
        }
    }

    pub fn with_mc(mut self, mc: McMeta) -> Self {
        self.mc = Some(mc);
        self
    }

    pub fn with_scheme(mut self, scheme: impl fmt::Display) -> Self {
        self.inputs.scheme = Some(scheme.to_string());
        self
    }

    pub fn with_plug_in_sigma(mut self, plug_in: bool) -> Self {
        self.inputs.sigma_plug_in = plug_in;
        self
    }
}
