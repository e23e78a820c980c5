use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchemeKind {
    /// i.i.d. signs.
    Rademacher,
    /// Multinomial `(n; 1/n, …, 1/n)` counts.
    Efron,
    /// `W_i = (n/q)·1{i ∈ I}` with `I` a uniform subset of size `q`.
    RandomHoldOut { q: usize },
    /// Random hold-out with `q = n − 1`.
    LeaveOneOut,
    /// Regular V-fold: one of `V` contiguous blocks zeroed, the rest scaled by
    /// `V/(V−1)`.
    VFold { v: usize },
}

/// The law of a resampling weight vector `W ∈ ℝⁿ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct WeightScheme {
    kind: SchemeKind,
    n: usize,
}

impl WeightScheme {
    pub fn new(kind: SchemeKind, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidScheme(format!("n must be at least 2, got {n}")));
        }
        match kind {
            SchemeKind::RandomHoldOut { q } if q == 0 || q > n => {
                return Err(Error::InvalidScheme(format!(
                    "random hold-out size q = {q} must lie in 1..={n}"
                )))
            }
            SchemeKind::VFold { v } if v < 2 || v > n => {
                return Err(Error::InvalidScheme(format!(
                    "V = {v} must lie in 2..={n}"
                )))
            }
            SchemeKind::VFold { v } if !n.is_multiple_of(v) => {
                return Err(Error::InvalidScheme(format!(
                    "V = {v} does not divide n = {n}; only regular V-fold blocks are supported"
                )))
            }
            _ => {}
        }
        Ok(Self { kind, n })
    }

    pub fn rademacher(n: usize) -> Result<Self> {
        Self::new(SchemeKind::Rademacher, n)
    }

    pub fn efron(n: usize) -> Result<Self> {
        Self::new(SchemeKind::Efron, n)
    }

    pub fn random_hold_out(n: usize, q: usize) -> Result<Self> {
        Self::new(SchemeKind::RandomHoldOut { q }, n)
    }

    pub fn leave_one_out(n: usize) -> Result<Self> {
        Self::new(SchemeKind::LeaveOneOut, n)
    }

    pub fn v_fold(n: usize, v: usize) -> Result<Self> {
        Self::new(SchemeKind::VFold { v }, n)
    }

    pub fn kind(&self) -> SchemeKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Same kind for a different sample size.
    pub fn with_n(&self, n: usize) -> Result<Self> {
        Self::new(self.kind, n)
    }

    /// Hold-out size for the subset schemes, `LeaveOneOut` included.
    pub(crate) fn hold_out_size(&self) -> Option<usize> {
        match self.kind {
            SchemeKind::RandomHoldOut { q } => Some(q),
            SchemeKind::LeaveOneOut => Some(self.n - 1),
            _ => None,
        }
    }

    /// `(x₀, a)` with `|W_i − x₀| = a` almost surely, when such a pair exists.
    pub fn two_point_center(&self) -> Option<(f64, f64)> {
        let n = self.n as f64;
        match self.kind {
            SchemeKind::Rademacher => Some((0.0, 1.0)),
            SchemeKind::Efron => None,
            SchemeKind::RandomHoldOut { .. } | SchemeKind::LeaveOneOut => {
                let q = self.hold_out_size().unwrap() as f64;
                let half = n / (2.0 * q);
                Some((half, half))
            }
            SchemeKind::VFold { v } => {
                let half = v as f64 / (2.0 * (v as f64 - 1.0));
                Some((half, half))
            }
        }
    }

    /// Number of atoms of the weight law, when it fits in a `u128`.
    pub fn support_cardinality(&self) -> Option<u128> {
        match self.kind {
            SchemeKind::Rademacher => 1u128.checked_shl(self.n as u32).filter(|_| self.n < 128),
            SchemeKind::Efron => (self.n as u128).checked_pow(self.n as u32),
            SchemeKind::RandomHoldOut { q } => binomial_u128(self.n, q),
            SchemeKind::LeaveOneOut => Some(self.n as u128),
            SchemeKind::VFold { v } => Some(v as u128),
        }
    }

    /// Support size in the notation of the accuracy/complexity comparison:
    /// `nⁿ` for Efron, `2ⁿ` for Rademacher, numeric otherwise when it fits.
    pub fn complexity_label(&self) -> String {
        match self.kind {
            SchemeKind::Efron => format!("{n}^{n}", n = self.n),
            SchemeKind::Rademacher => format!("2^{}", self.n),
            SchemeKind::RandomHoldOut { q } => match binomial_u128(self.n, q) {
                Some(c) => c.to_string(),
                None => format!("C({},{q})", self.n),
            },
            _ => self.support_cardinality().unwrap().to_string(),
        }
    }

    /// True when all coordinates are exchangeable (every kind except V-fold).
    pub fn exchangeable(&self) -> bool {
        !matches!(self.kind, SchemeKind::VFold { .. })
    }
}

impl fmt::Display for WeightScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            SchemeKind::Rademacher => f.write_str("rademacher"),
            SchemeKind::Efron => f.write_str("efron"),
            SchemeKind::RandomHoldOut { q } => write!(f, "rho:{q}"),
            SchemeKind::LeaveOneOut => f.write_str("loo"),
            SchemeKind::VFold { v } => write!(f, "vfold:{v}"),
        }
    }
}

/// Scheme name without `n`, as accepted on the command line:
/// `rademacher`, `efron`, `rho:<q>`, `rho:half`, `loo`, `vfold:<V>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SchemeSpec(SchemeSpecInner);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SchemeSpecInner {
    Kind(SchemeKind),
    HalfHoldOut,
}

impl SchemeSpec {
    pub fn bind(&self, n: usize) -> Result<WeightScheme> {
        match self.0 {
            SchemeSpecInner::Kind(kind) => WeightScheme::new(kind, n),
            SchemeSpecInner::HalfHoldOut => {
                if !n.is_multiple_of(2) {
                    return Err(Error::InvalidScheme(format!("rho:half needs even n, got {n}")));
                }
                WeightScheme::random_hold_out(n, n / 2)
            }
        }
    }
}

impl fmt::Display for SchemeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            SchemeSpecInner::HalfHoldOut => f.write_str("rho:half"),
            SchemeSpecInner::Kind(kind) => match kind {
                SchemeKind::Rademacher => f.write_str("rademacher"),
                SchemeKind::Efron => f.write_str("efron"),
                SchemeKind::RandomHoldOut { q } => write!(f, "rho:{q}"),
                SchemeKind::LeaveOneOut => f.write_str("loo"),
                SchemeKind::VFold { v } => write!(f, "vfold:{v}"),
            },
        }
    }
}

impl FromStr for SchemeSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let (name, arg) = match s.split_once(':') {
            Some((a, b)) => (a, Some(b)),
            None => (s.as_str(), None),
        };
        let int = |a: Option<&str>| -> Result<usize> {
            a.ok_or_else(|| Error::InvalidScheme(format!("{name} needs a parameter, e.g. {name}:5")))?
                .parse()
                .map_err(|_| Error::InvalidScheme(format!("bad parameter in {s:?}")))
        };
        let inner = match name {
            "rademacher" | "rad" => SchemeSpecInner::Kind(SchemeKind::Rademacher),
            "efron" | "bootstrap" => SchemeSpecInner::Kind(SchemeKind::Efron),
            "loo" | "leave-one-out" => SchemeSpecInner::Kind(SchemeKind::LeaveOneOut),
            "rho" if arg == Some("half") => SchemeSpecInner::HalfHoldOut,
            "rho" => SchemeSpecInner::Kind(SchemeKind::RandomHoldOut { q: int(arg)? }),
            "vfold" => SchemeSpecInner::Kind(SchemeKind::VFold { v: int(arg)? }),
            _ => return Err(Error::InvalidScheme(format!("unknown scheme {s:?}"))),
        };
        Ok(SchemeSpec(inner))
    }
}

pub(crate) fn binomial_u128(n: usize, k: usize) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}
