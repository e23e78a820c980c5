use super::binomial::gamma_coeffs;
use super::report::{InputsDigest, LevelSpec, McMeta, Method, ThresholdReport};
use crate::error::{Error, Result};
use crate::phi::PhiFunction;
use crate::resampling::{
    check_quantile_inputs, resampled_distributions, EngineConfig, ResampledDistribution, WeightScheme,
};
use crate::sample::Sample;
use crate::scalar::Real;

/// An externally supplied bound `f(Y)` on `φ̃(Ȳ − μ)`, valid at `level`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrailingBound<T> {
    pub value: T,
    pub level: f64,
}

/// Quantile-chain threshold
///
/// `q_{(1−δ)α₀}(φ, Y−Ȳ) + Σ_{i=1}^{J−1} γ_i·q_{(1−δ)α_i}(φ̃, Y−Ȳ) + γ_J·f(Y)`
///
/// with Rademacher weights, `J = levels.alphas.len()` and `γ_k` from
/// [`gamma_coeffs`]. All quantiles share the same weight draws. The report's
/// guaranteed level is `Σ α_i + trailing.level`.
pub fn quantile_chain_threshold<T: Real>(
    sample: &Sample<T>,
    phi: &PhiFunction,
    levels: &LevelSpec,
    trailing: TrailingBound<T>,
    cfg: &EngineConfig,
) -> Result<ThresholdReport<T>> {
    levels.validate()?;
    if levels.delta.is_none() {
        return Err(Error::invalid("the quantile chain needs δ"));
    }
    if levels.alphas.is_empty() {
        return Err(Error::invalid("the quantile chain needs J ≥ 1 levels"));
    }
    if !(trailing.value.is_finite() && trailing.value >= T::zero()) {
        return Err(Error::invalid(format!(
            "trailing bound f(Y) must be finite and nonnegative, got {}",
            trailing.value
        )));
    }
    let n = sample.len();
    let scheme = WeightScheme::rademacher(n)?;
    check_quantile_inputs(&scheme, phi)?;
    let sym = phi.symmetrized();

    let centered = sample.center_columns();
    let phis: Vec<PhiFunction> = if sym == *phi { vec![*phi] } else { vec![*phi, sym] };
    let dists = resampled_distributions(&centered, &scheme, &phis, cfg)?;
    let value = chain_from_distributions(&dists[0], dists.last().unwrap(), n, levels, trailing.value)?;

    let mut r = ThresholdReport::new(
        value,
        Method::QuantileChain,
        levels.clone(),
        InputsDigest {
            n,
            k: Some(sample.dim()),
            ..Default::default()
        },
    )
    .with_scheme(scheme)
    .with_mc(McMeta {
        draws: cfg.draws(),
        seed: cfg.master_seed,
        stderr: 0.0,
    });
    r.guaranteed_level = levels.alphas.iter().sum::<f64>() + trailing.level;
    Ok(r)
}

/// Chain value from already computed Rademacher distributions of `φ` and
/// `φ̃` on centered data of size `n`.
pub fn chain_from_distributions<T: Real>(
    main: &ResampledDistribution<T>,
    tilde: &ResampledDistribution<T>,
    n: usize,
    levels: &LevelSpec,
    trailing: T,
) -> Result<T> {
    levels.validate()?;
    let delta = levels
        .delta
        .ok_or_else(|| Error::invalid("the quantile chain needs δ"))?;
    let gamma = gamma_coeffs(n as u64, &levels.alphas, delta)?;
    let mut value = main.upper_quantile((1.0 - delta) * levels.alphas[0])?;
    for (g, &a) in gamma.iter().zip(&levels.alphas[1..]) {
        value = value + T::lit(*g) * tilde.upper_quantile((1.0 - delta) * a)?;
    }
    Ok(value + T::lit(*gamma.last().unwrap()) * trailing)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::resampling::resampled_quantile;

    fn sample() -> Sample<f64> {
        Sample::from_columns(&[
            vec![0.3, -1.2],
            vec![1.1, 0.4],
            vec![-0.7, 0.9],
            vec![2.0, -0.1],
            vec![-0.5, -0.6],
            vec![0.8, 1.5],
        ])
        .unwrap()
    }

    #[test]
    fn single_level_is_quantile_plus_gamma_f() {
        let y = sample();
        let lv = LevelSpec::default_chain(0.05);
        let cfg = EngineConfig::exact();
        let f = TrailingBound { value: 0.8, level: 0.005 };
        let t = quantile_chain_threshold(&y, &PhiFunction::SUP_ABS, &lv, f, &cfg).unwrap();
        let q = resampled_quantile(
            &y.center_columns(),
            &WeightScheme::rademacher(6).unwrap(),
            &PhiFunction::SUP_ABS,
            0.9 * 0.045,
            &cfg,
        )
        .unwrap();
        let g = gamma_coeffs(6, &[0.045], 0.1).unwrap()[0];
        assert!((t.value - (q + g * 0.8)).abs() < 1e-15);
        assert!((t.guaranteed_level - 0.05).abs() < 1e-15);

        let zero_f = quantile_chain_threshold(
            &y,
            &PhiFunction::SUP_ABS,
            &lv,
            TrailingBound { value: 0.0, level: 0.005 },
            &cfg,
        )
        .unwrap();
        assert_eq!(zero_f.value, q);
    }

    #[test]
    fn affine_in_f() {
        let y = sample();
        let lv = LevelSpec {
            alpha: 0.1,
            delta: Some(0.1),
            alphas: vec![0.05, 0.03],
        };
        let cfg = EngineConfig::exact();
        let at = |f: f64| {
            quantile_chain_threshold(&y, &PhiFunction::SUP_ABS, &lv, TrailingBound { value: f, level: 0.02 }, &cfg)
                .unwrap()
                .value
        };
        let gj = gamma_coeffs(6, &lv.alphas, 0.1).unwrap()[1];
        assert!((at(2.0) - at(1.0) - gj).abs() < 1e-12);
        assert!(at(2.0) >= at(1.0));
    }

    #[test]
    fn signed_sup_uses_symmetrized_tail() {
        let y = sample();
        let lv = LevelSpec::default_chain(0.05);
        let r = quantile_chain_threshold(
            &y,
            &PhiFunction::SUP,
            &lv,
            TrailingBound { value: 1.0, level: 0.005 },
            &EngineConfig::exact(),
        );
        // Sup is not nonnegative
        assert!(r.is_err());
    }

    #[test]
    fn rejects_empty_chain() {
        let y = sample();
        let lv = LevelSpec::split(0.05, 0.1);
        assert!(quantile_chain_threshold(
            &y,
            &PhiFunction::SUP_ABS,
            &lv,
            TrailingBound { value: 1.0, level: 0.005 },
            &EngineConfig::exact()
        )
        .is_err());
    }
}
