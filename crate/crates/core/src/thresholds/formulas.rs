//! Closed-form thresholds. Every function takes the resampled expectation
//! `E[φ(Ȳ_[W−W̄]) | Y]` as an input, so these stay pure and cheap; the
//! engine computes that value upstream.

use super::report::{
    CompoundBranch, Direction, InputsDigest, LevelSpec, Method, Sided, ThresholdReport,
};
use super::special::inv_normal_upper;
use crate::error::{Error, Result};
use crate::resampling::{ConstantName, ResamplingConstants};
use crate::scalar::Real;

/// `(BA)(p, M)`: `‖Yⁱ − μ‖_p ≤ M` almost surely.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundedAssumption<T> {
    pub m: T,
    pub p: crate::phi::PExponent,
}

impl<T: Real> BoundedAssumption<T> {
    pub fn new(m: T, p: crate::phi::PExponent) -> Result<Self> {
        if !(m.is_finite() && m > T::zero()) {
            return Err(Error::invalid(format!("M must be positive and finite, got {m}")));
        }
        Ok(Self { m, p })
    }
}

fn check_n(n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::TooFewObservations(n));
    }
    Ok(n as f64)
}

fn check_nonneg<T: Real>(name: &str, x: T) -> Result<()> {
    if x.is_finite() && x >= T::zero() {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be finite and nonnegative, got {x}")))
    }
}

fn check_finite<T: Real>(name: &str, x: T) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be finite, got {x}")))
    }
}

fn positive(c: &ResamplingConstants, which: ConstantName) -> Result<f64> {
    match c.get(which) {
        Some(k) if k.value.is_finite() && k.value > 0.0 => Ok(k.value),
        Some(k) => Err(Error::invalid(format!("{which}_W must be positive, got {}", k.value))),
        None => Err(Error::invalid(format!("{which}_W is missing"))),
    }
}

/// `(σ∞/√n)·Φ̄⁻¹(α/K)`, or `α/(2K)` two-sided.
pub fn bonferroni_threshold<T: Real>(
    sigma_inf: T,
    n: usize,
    k: usize,
    alpha: f64,
    sided: Sided,
) -> Result<ThresholdReport<T>> {
    check_nonneg("σ∞", sigma_inf)?;
    let nf = check_n(n)?;
    if k == 0 {
        return Err(Error::NoCoordinates);
    }
    LevelSpec::single(alpha).validate()?;
    let per_test = match sided {
        Sided::One => alpha / k as f64,
        Sided::Two => alpha / (2.0 * k as f64),
    };
    let z = inv_normal_upper(per_test)?;
    let value = sigma_inf * T::lit(z / nf.sqrt());
    Ok(ThresholdReport::new(
        value,
        Method::Bonferroni,
        LevelSpec::single(alpha),
        InputsDigest {
            n,
            k: Some(k),
            sigma_norm: Some(sigma_inf.to_f64_lossy()),
            ..Default::default()
        },
    ))
}

/// The uncorrected single-test threshold: Bonferroni with `K = 1`.
pub fn single_test_threshold<T: Real>(
    sigma_inf: T,
    n: usize,
    alpha: f64,
    sided: Sided,
) -> Result<ThresholdReport<T>> {
    let mut r = bonferroni_threshold(sigma_inf, n, 1, alpha, sided)?;
    r.method = Method::SingleTest;
    Ok(r)
}

/// Gaussian concentration threshold
/// `E/B + ‖σ‖_p·Φ̄⁻¹(α/2)·[C/(nB) + 1/√n]`; the lower-deviation version
/// subtracts the additive term.
pub fn conc_gaussian_threshold<T: Real>(
    resampled_e: T,
    constants: &ResamplingConstants,
    sigma_p: T,
    n: usize,
    alpha: f64,
    direction: Direction,
) -> Result<ThresholdReport<T>> {
    check_finite("resampled expectation", resampled_e)?;
    check_nonneg("‖σ‖_p", sigma_p)?;
    let nf = check_n(n)?;
    LevelSpec::single(alpha).validate()?;
    let b = positive(constants, ConstantName::B)?;
    let c = positive(constants, ConstantName::C)?;
    let z = inv_normal_upper(alpha / 2.0)?;
    let spread = sigma_p * T::lit(z * (c / (nf * b) + 1.0 / nf.sqrt()));
    let center = resampled_e / T::lit(b);
    let value = match direction {
        Direction::Upper => center + spread,
        Direction::Lower => center - spread,
    };
    let mut r = ThresholdReport::new(
        value,
        Method::ConcGaussian,
        LevelSpec::single(alpha),
        InputsDigest {
            n,
            sigma_norm: Some(sigma_p.to_f64_lossy()),
            ..Default::default()
        }
        .with_constants(constants, &[ConstantName::B, ConstantName::C]),
    );
    r.direction = direction;
    Ok(r)
}

/// Bounded symmetric thresholds:
/// upper `E/A + (2M/√n)·√log(1/α)`, and, when `D_W` exists,
/// lower `E/D − (M/√n)·√(1 + A²/D²)·√(2 log(1/α))`.
pub fn conc_bounded_thresholds<T: Real>(
    resampled_e: T,
    constants: &ResamplingConstants,
    ba: &BoundedAssumption<T>,
    n: usize,
    alpha: f64,
) -> Result<(ThresholdReport<T>, Option<ThresholdReport<T>>)> {
    check_finite("resampled expectation", resampled_e)?;
    let nf = check_n(n)?;
    LevelSpec::single(alpha).validate()?;
    let a = positive(constants, ConstantName::A)?;
    let log_inv = (1.0 / alpha).ln();
    let digest = InputsDigest {
        n,
        ..Default::default()
    };
    let upper_val = resampled_e / T::lit(a) + ba.m * T::lit(2.0 / nf.sqrt() * log_inv.sqrt());
    let upper = ThresholdReport::new(
        upper_val,
        Method::ConcBounded,
        LevelSpec::single(alpha),
        digest
            .clone()
            .with_constants(constants, &[ConstantName::A]),
    );
    let lower = match constants.d {
        None => None,
        Some(_) => {
            let d = positive(constants, ConstantName::D)?;
            let width = (1.0 + a * a / (d * d)).sqrt() * (2.0 * log_inv).sqrt() / nf.sqrt();
            let mut r = ThresholdReport::new(
                resampled_e / T::lit(d) - ba.m * T::lit(width),
                Method::ConcBounded,
                LevelSpec::single(alpha),
                digest.with_constants(constants, &[ConstantName::A, ConstantName::D]),
            );
            r.direction = Direction::Lower;
            Some(r)
        }
    };
    Ok((upper, lower))
}

/// `min(t_det, E/B + (‖σ‖_p/√n)·Φ̄⁻¹(α(1−δ)/2) + (‖σ‖_p·C/(nB))·Φ̄⁻¹(αδ/2))`,
/// where `t_det` is a deterministic threshold at level `α(1−δ)`.
#[allow(clippy::too_many_arguments)]
pub fn compound_threshold<T: Real>(
    resampled_e: T,
    constants: &ResamplingConstants,
    sigma_p: T,
    n: usize,
    alpha: f64,
    delta: f64,
    t_det: T,
) -> Result<ThresholdReport<T>> {
    check_finite("resampled expectation", resampled_e)?;
    check_nonneg("‖σ‖_p", sigma_p)?;
    if t_det.is_nan() {
        return Err(Error::invalid("deterministic threshold is NaN"));
    }
    let nf = check_n(n)?;
    let level = LevelSpec::split(alpha, delta);
    level.validate()?;
    let b = positive(constants, ConstantName::B)?;
    let c = positive(constants, ConstantName::C)?;
    let z_main = inv_normal_upper(alpha * (1.0 - delta) / 2.0)?;
    let z_resample = inv_normal_upper(alpha * delta / 2.0)?;
    let conc = resampled_e / T::lit(b)
        + sigma_p * T::lit(z_main / nf.sqrt() + c / (nf * b) * z_resample);
    let (value, branch) = if conc <= t_det {
        (conc, CompoundBranch::Concentration)
    } else {
        (t_det, CompoundBranch::Deterministic)
    };
    let mut r = ThresholdReport::new(
        value,
        Method::Compound,
        level,
        InputsDigest {
            n,
            sigma_norm: Some(sigma_p.to_f64_lossy()),
            ..Default::default()
        }
        .with_constants(constants, &[ConstantName::B, ConstantName::C]),
    );
    r.branch = Some(branch);
    Ok(r)
}

/// High-probability interval for the Lᵖ risk `E‖Ȳ − μ‖_p`:
/// `E/B ∓ ‖σ‖_p·C/(nB)·Φ̄⁻¹(α/2)`, with `E` computed for `φ = ‖·‖_p`.
pub fn lp_risk_interval<T: Real>(
    resampled_e_pnorm: T,
    constants: &ResamplingConstants,
    sigma_p: T,
    n: usize,
    alpha: f64,
) -> Result<(T, T)> {
    check_finite("resampled expectation", resampled_e_pnorm)?;
    check_nonneg("‖σ‖_p", sigma_p)?;
    let nf = check_n(n)?;
    LevelSpec::single(alpha).validate()?;
    let b = positive(constants, ConstantName::B)?;
    let c = positive(constants, ConstantName::C)?;
    let mid = resampled_e_pnorm / T::lit(b);
    let half = sigma_p * T::lit(c / (nf * b) * inv_normal_upper(alpha / 2.0)?);
    Ok((mid - half, mid + half))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phi::PExponent;
    use crate::resampling::{scheme_constants, WeightScheme};

    fn unit_bc() -> ResamplingConstants {
        // half hold-out with n large has A = B = D = 1; override C to 1
        let mut k = scheme_constants(&WeightScheme::random_hold_out(100, 50).unwrap()).unwrap();
        k.c.value = 1.0;
        k
    }

    #[test]
    fn bonferroni_examples() {
        let t = bonferroni_threshold(1.0f64, 100, 100, 0.05, Sided::One).unwrap();
        assert!((t.value - 0.329_052_673_149_189_5).abs() < 1e-9);
        let single = single_test_threshold(2.0, 25, 0.05, Sided::One).unwrap();
        let z = inv_normal_upper(0.05).unwrap();
        assert!((single.value - 2.0 / 5.0 * z).abs() < 1e-15);
        assert_eq!(single.method, Method::SingleTest);
        let two = bonferroni_threshold(1.0, 100, 100, 0.05, Sided::Two).unwrap();
        assert!(two.value > t.value);
    }

    #[test]
    fn conc_gaussian_examples() {
        let k = unit_bc();
        let zero = conc_gaussian_threshold(0.0, &k, 0.0, 100, 0.05, Direction::Upper).unwrap();
        assert_eq!(zero.value, 0.0);
        let up = conc_gaussian_threshold(0.2f64, &k, 1.0, 100, 0.05, Direction::Upper).unwrap();
        assert!((up.value - 0.415_596_038_299_406).abs() < 1e-12);
        let lo = conc_gaussian_threshold(0.2f64, &k, 1.0, 100, 0.05, Direction::Lower).unwrap();
        let width = 2.0 * 1.959_963_984_540_054 * 0.11;
        assert!((up.value - lo.value - width).abs() < 1e-12);
    }

    #[test]
    fn conc_bounded_examples() {
        let k = unit_bc();
        let ba = BoundedAssumption::new(1.0f64, PExponent::Infinity).unwrap();
        let (up, lo) = conc_bounded_thresholds(0.3, &k, &ba, 100, 0.05).unwrap();
        assert!((up.value - 0.646_163_676_520_457).abs() < 1e-12);
        assert!(lo.is_some());
        let (near_one, _) = conc_bounded_thresholds(0.3, &k, &ba, 100, 1.0 - 1e-12).unwrap();
        assert!((near_one.value - 0.3).abs() < 1e-6);

        let efron = scheme_constants(&WeightScheme::efron(100).unwrap()).unwrap();
        let (_, lo) = conc_bounded_thresholds(0.3, &efron, &ba, 100, 0.05).unwrap();
        assert!(lo.is_none());
        assert!(BoundedAssumption::new(f64::INFINITY, PExponent::Infinity).is_err());
    }

    #[test]
    fn compound_examples() {
        let k = unit_bc();
        let t = compound_threshold(0.2, &k, 1.0, 100, 0.05, 0.1, f64::INFINITY).unwrap();
        assert!((t.value - 0.428_535_783_859_948).abs() < 1e-12);
        assert_eq!(t.branch, Some(CompoundBranch::Concentration));
        let capped = compound_threshold(0.2, &k, 1.0, 100, 0.05, 0.1, 0.3).unwrap();
        assert_eq!(capped.value, 0.3);
        assert_eq!(capped.branch, Some(CompoundBranch::Deterministic));
    }

    #[test]
    fn lp_interval() {
        let k = scheme_constants(&WeightScheme::leave_one_out(50).unwrap()).unwrap();
        let (lo, hi) = lp_risk_interval(0.7, &k, 2.0, 50, 0.05).unwrap();
        assert!(((lo + hi) / 2.0 - 0.7 / k.b.value).abs() < 1e-12);
        let want = 2.0 * 2.0 * k.c.value / (50.0 * k.b.value) * 1.959_963_984_540_054;
        assert!((hi - lo - want).abs() < 1e-12);
        let (a, b) = lp_risk_interval(0.7, &k, 0.0, 50, 0.05).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn input_errors() {
        let k = unit_bc();
        assert!(conc_gaussian_threshold(f64::NAN, &k, 1.0, 10, 0.05, Direction::Upper).is_err());
        assert!(conc_gaussian_threshold(0.1, &k, -1.0, 10, 0.05, Direction::Upper).is_err());
        assert!(bonferroni_threshold(1.0, 10, 0, 0.05, Sided::Two).is_err());
        assert!(bonferroni_threshold(1.0, 10, 3, 0.0, Sided::Two).is_err());
        let mut bad = k;
        bad.b.value = 0.0;
        assert!(conc_gaussian_threshold(0.1, &bad, 1.0, 10, 0.05, Direction::Upper).is_err());
    }
}
