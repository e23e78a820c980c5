//! Upper quantiles of a Binomial(n, ½) variable and the correction
//! coefficients built from them.

use crate::error::{Error, Result};

const EXACT_MAX_N: u64 = 64;

/// `B̄(n, η) = min{k ∈ 0..=n : 2⁻ⁿ Σ_{i>k} C(n,i) < η}`.
///
/// Exact integer arithmetic for `n ≤ 64`; log-sum-exp accumulation of the
/// tail beyond.
pub fn binom_upper_quantile(n: u64, eta: f64) -> Result<u64> {
    if n == 0 {
        return Err(Error::invalid("binomial size must be at least 1"));
    }
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::invalid(format!("η must lie in (0, 1), got {eta}")));
    }
    if n <= EXACT_MAX_N {
        Ok(exact_quantile(n, eta))
    } else {
        Ok(log_space_quantile(n, eta))
    }
}

fn exact_quantile(n: u64, eta: f64) -> u64 {
    // tail < η·2ⁿ  ⟺  tail < ⌈η·2ⁿ⌉ for integer tails; η·2ⁿ is exact in f64
    let bound = (eta * 2f64.powi(n as i32)).ceil() as u128;
    let mut tail: u128 = (1u128 << n) - 1; // Σ_{i ≥ 1}
    let mut binom: u128 = 1; // C(n, k)
    for k in 0..=n {
        if tail < bound {
            return k;
        }
        binom = binom * (n - k) as u128 / (k + 1) as u128;
        tail -= binom;
    }
    n
}

fn log_space_quantile(n: u64, eta: f64) -> u64 {
    let ln2n = n as f64 * std::f64::consts::LN_2;
    let mut log_c = vec![0.0f64; n as usize + 1];
    for i in 1..=n as usize {
        log_c[i] = log_c[i - 1] + ((n as usize - i + 1) as f64).ln() - (i as f64).ln();
    }
    let target = eta.ln();
    // suffix[k] = ln Σ_{i>k} C(n,i) − n ln 2, accumulated from the top
    let mut suffix = vec![f64::NEG_INFINITY; n as usize + 1];
    let mut acc = f64::NEG_INFINITY;
    for k in (0..n as usize).rev() {
        acc = log_add(acc, log_c[k + 1] - ln2n);
        suffix[k] = acc;
    }
    (0..=n).find(|&k| suffix[k as usize] < target).unwrap_or(n)
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `γ_k = n⁻ᵏ Π_{i<k} (2B̄(n, α_i δ/2) − n)` for `k = 1..=J`.
pub fn gamma_coeffs(n: u64, alphas: &[f64], delta: f64) -> Result<Vec<f64>> {
    if alphas.is_empty() {
        return Err(Error::invalid("the quantile chain needs J ≥ 1 levels"));
    }
    let mut out = Vec::with_capacity(alphas.len());
    let mut acc = 1.0;
    for &a in alphas {
        let eta = a * delta / 2.0;
        if !(eta > 0.0 && eta < 0.5) {
            return Err(Error::invalid(format!(
                "α_i δ / 2 must lie in (0, ½), got {eta}"
            )));
        }
        let b = binom_upper_quantile(n, eta)?;
        acc *= (2 * b) as f64 / n as f64 - 1.0;
        out.push(acc);
    }
    Ok(out)
}
