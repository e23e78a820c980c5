//! Contrast functions `φ : ℝᴷ → ℝ` used to measure the deviation `Ȳ − μ`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Exponent of a p-norm. `∞` is its own variant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PExponent {
    Finite(f64),
    Infinity,
}

impl PExponent {
    pub fn finite(p: f64) -> Result<Self> {
        if p.is_finite() && p >= 1.0 {
            Ok(PExponent::Finite(p))
        } else if p == f64::INFINITY {
            Ok(PExponent::Infinity)
        } else {
            Err(Error::invalid(format!("p-norm exponent must lie in [1, ∞], got {p}")))
        }
    }
}

impl fmt::Display for PExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PExponent::Finite(p) => write!(f, "{p}"),
            PExponent::Infinity => f.write_str("inf"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhiKind {
    /// `max_k x_k`
    Sup,
    /// `max_k |x_k|`
    SupAbs,
    /// `‖x‖_p`
    PNorm(PExponent),
}

/// A catalogued contrast function together with the structural properties
/// the threshold theorems rely on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiFunction {
    kind: PhiKind,
}

impl PhiFunction {
    pub const SUP: PhiFunction = PhiFunction { kind: PhiKind::Sup };
    pub const SUP_ABS: PhiFunction = PhiFunction {
        kind: PhiKind::SupAbs,
    };

    pub fn new(kind: PhiKind) -> Self {
        Self { kind }
    }

    pub fn pnorm(p: f64) -> Result<Self> {
        Ok(Self::new(PhiKind::PNorm(PExponent::finite(p)?)))
    }

    pub fn kind(&self) -> PhiKind {
        self.kind
    }

    pub fn subadditive(&self) -> bool {
        true
    }

    pub fn positive_homogeneous(&self) -> bool {
        true
    }

    /// `Sup` takes negative values; the other kinds do not.
    pub fn nonnegative(&self) -> bool {
        !matches!(self.kind, PhiKind::Sup)
    }

    /// The `p` for which `|φ(x)| ≤ ‖x‖_p`.
    pub fn p_bound(&self) -> PExponent {
        match self.kind {
            PhiKind::Sup | PhiKind::SupAbs => PExponent::Infinity,
            PhiKind::PNorm(p) => p,
        }
    }

    /// `φ̃(x) = max(φ(x), φ(−x))`. For `Sup` this is `SupAbs`; the other kinds
    /// are already sign-symmetric.
    pub fn symmetrized(&self) -> PhiFunction {
        match self.kind {
            PhiKind::Sup => Self::SUP_ABS,
            _ => *self,
        }
    }

    pub fn eval<T: Real>(&self, x: &[T]) -> Result<T> {
        if x.is_empty() {
            return Err(Error::invalid("φ evaluated on an empty vector"));
        }
        Ok(self.eval_unchecked(x))
    }

    /// Evaluation without the emptiness check, for hot loops whose inputs
    /// always have `K ≥ 1` entries.
    #[inline]
    pub(crate) fn eval_unchecked<T: Real>(&self, x: &[T]) -> T {
        match self.kind {
            PhiKind::Sup => x.iter().copied().fold(T::neg_infinity(), T::max),
            PhiKind::SupAbs => x.iter().fold(T::zero(), |m, v| m.max(v.abs())),
            PhiKind::PNorm(p) => p_norm(x, p),
        }
    }
}

impl fmt::Display for PhiFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            PhiKind::Sup => f.write_str("sup"),
            PhiKind::SupAbs => f.write_str("supabs"),
            PhiKind::PNorm(p) => write!(f, "pnorm:{p}"),
        }
    }
}

impl FromStr for PhiFunction {
    type Err = Error;

    /// Accepts `sup`, `supabs`, `pnorm:<p>` and `pnorm:inf`.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sup" => Ok(Self::SUP),
            "supabs" | "sup_abs" => Ok(Self::SUP_ABS),
            other => match other.strip_prefix("pnorm:") {
                Some("inf") => Ok(Self::new(PhiKind::PNorm(PExponent::Infinity))),
                Some(p) => {
                    let p: f64 = p
                        .parse()
                        .map_err(|_| Error::invalid(format!("bad p-norm exponent {p:?}")))?;
                    Self::pnorm(p)
                }
                None => Err(Error::invalid(format!("unknown φ {s:?}"))),
            },
        }
    }
}

/// `‖x‖_p`. Finite exponents rescale by `max|x_k|` before summing so large `p`
/// cannot overflow.
pub(crate) fn p_norm<T: Real>(x: &[T], p: PExponent) -> T {
    let max = x.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    match p {
        PExponent::Infinity => max,
        PExponent::Finite(p) => {
            if max == T::zero() {
                return T::zero();
            }
            if p == 1.0 {
                return x.iter().map(|v| v.abs()).sum();
            }
            let pt = T::lit(p);
            let s: T = x.iter().map(|v| (v.abs() / max).powf(pt)).sum();
            max * s.powf(T::one() / pt)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn all_kinds() -> Vec<PhiFunction> {
        vec![
            PhiFunction::SUP,
            PhiFunction::SUP_ABS,
            PhiFunction::pnorm(1.0).unwrap(),
            PhiFunction::pnorm(2.0).unwrap(),
            PhiFunction::pnorm(3.5).unwrap(),
            PhiFunction::pnorm(64.0).unwrap(),
            PhiFunction::new(PhiKind::PNorm(PExponent::Infinity)),
        ]
    }

    #[test]
    fn definition_examples() {
        assert_eq!(PhiFunction::SUP.eval(&[1.0, -2.0]).unwrap(), 1.0);
        assert_eq!(PhiFunction::SUP_ABS.eval(&[1.0, -2.0]).unwrap(), 2.0);
        assert_eq!(PhiFunction::pnorm(2.0).unwrap().eval(&[3.0, 4.0]).unwrap(), 5.0);
        let inf = PhiFunction::new(PhiKind::PNorm(PExponent::Infinity));
        assert_eq!(inf.eval(&[1.0f32, -2.0]).unwrap(), 2.0);
    }

    #[test]
    fn empty_is_error() {
        assert!(PhiFunction::SUP.eval::<f64>(&[]).is_err());
    }

    #[test]
    fn flags() {
        assert!(!PhiFunction::SUP.nonnegative());
        assert!(PhiFunction::SUP_ABS.nonnegative());
        assert_eq!(PhiFunction::SUP.p_bound(), PExponent::Infinity);
        assert_eq!(
            PhiFunction::pnorm(3.0).unwrap().p_bound(),
            PExponent::Finite(3.0)
        );
        assert_eq!(PhiFunction::SUP.symmetrized(), PhiFunction::SUP_ABS);
        assert!(PhiFunction::pnorm(0.5).is_err());
    }

    #[test]
    fn large_p_does_not_overflow() {
        let x = [1e300f64, 1e300];
        let v = PhiFunction::pnorm(64.0).unwrap().eval(&x).unwrap();
        assert!(v.is_finite());
        assert!((v / 1e300 - 2f64.powf(1.0 / 64.0)).abs() < 1e-14);
    }

    #[test]
    fn parse_roundtrip() {
        for phi in all_kinds() {
            assert_eq!(phi.to_string().parse::<PhiFunction>().unwrap(), phi);
        }
    }

    fn ulps(a: f64, b: f64) -> u64 {
        if a == b {
            return 0;
        }
        (a.to_bits() as i64 - b.to_bits() as i64).unsigned_abs()
    }

    proptest! {
        #[test]
        fn positively_homogeneous(x in prop::collection::vec(-1e3f64..1e3, 1..12), lam in 0.0f64..1e3) {
            for phi in all_kinds() {
                let lhs = phi.eval(&x.iter().map(|v| lam * v).collect::<Vec<_>>()).unwrap();
                let rhs = lam * phi.eval(&x).unwrap();
                if rhs == 0.0 {
                    prop_assert!(lhs.abs() <= f64::MIN_POSITIVE * 4.0);
                } else {
                    prop_assert!(ulps(lhs, rhs) <= 4, "{phi}: {lhs} vs {rhs}");
                }
            }
        }

        #[test]
        fn subadditive(pair in (1usize..12).prop_flat_map(|k| (
            prop::collection::vec(-1e3f64..1e3, k),
            prop::collection::vec(-1e3f64..1e3, k),
        ))) {
            let (x, y) = pair;
            let xy: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
            for phi in all_kinds() {
                let (fx, fy) = (phi.eval(&x).unwrap(), phi.eval(&y).unwrap());
                prop_assert!(phi.eval(&xy).unwrap() <= fx + fy + 1e-12 * (fx.abs() + fy.abs()));
            }
        }

        #[test]
        fn bounded_by_declared_norm(x in prop::collection::vec(-1e3f64..1e3, 1..12)) {
            for phi in all_kinds() {
                let bound = p_norm(&x, phi.p_bound());
                prop_assert!(phi.eval(&x).unwrap().abs() <= bound * (1.0 + 1e-14));
            }
        }
    }
}
