//! Standard Gaussian upper tail `Φ̄` and its inverse.

use std::f64::consts::PI;

use crate::error::{Error, Result};

const SWITCH_TO_FRACTION: f64 = 3.0;

/// Standard Gaussian density.
pub fn normal_density(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// `Φ̄(x) = P(N(0,1) > x)`, with full relative accuracy in the upper tail.
///
/// Below `x = 3` it uses the all-positive series
/// `Φ(x) = ½ + φ(x)·Σ x^{2k+1}/(2k+1)!!`; above, the Laplace continued
/// fraction `Φ̄(x) = φ(x) / (x + 1/(x + 2/(x + 3/(x + …))))`.
pub fn normal_upper_tail(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x < 0.0 {
        return 1.0 - normal_upper_tail(-x);
    }
    if x < SWITCH_TO_FRACTION {
        let x2 = x * x;
        let mut term = x;
        let mut sum = x;
        let mut k = 1.0;
        while term > 1e-17 * sum {
            term *= x2 / (2.0 * k + 1.0);
            sum += term;
            k += 1.0;
        }
        return 0.5 - normal_density(x) * sum;
    }
    normal_density(x) / laplace_fraction(x)
}

/// `x + 1/(x + 2/(x + 3/(x + …)))` by the modified Lentz method.
fn laplace_fraction(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    for j in 1..2000 {
        let a = j as f64;
        d = x + a * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = x + a / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    f
}

/// `Φ̄⁻¹(α)`: the `z` with `P(N(0,1) > z) = α`.
///
/// Acklam's rational approximation of the Gaussian quantile followed by
/// Halley steps against [`normal_upper_tail`].
pub fn inv_normal_upper(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(format!(
            "upper-tail probability must lie in (0, 1), got {alpha}"
        )));
    }
    if alpha == 0.5 {
        return Ok(0.0);
    }
    if alpha > 0.5 {
        return Ok(-inv_normal_upper(1.0 - alpha)?);
    }
    let mut z = -acklam_lower(alpha);
    for _ in 0..4 {
        let u = (normal_upper_tail(z) - alpha) / normal_density(z);
        let step = u / (1.0 - 0.5 * z * u);
        z += step;
        if step.abs() <= 1e-15 * z.abs().max(1.0) {
            break;
        }
    }
    if z.is_finite() {
        Ok(z)
    } else {
        Err(Error::Numerical(format!("Φ̄⁻¹({alpha}) did not converge")))
    }
}

/// Lower-tail Gaussian quantile for `p ≤ ½`, relative error about 1e−9.
fn acklam_lower(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    if p < 0.02425 {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    }
}
