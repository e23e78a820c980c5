use confreg::resampling::{
    resampled_distributions, resampled_expectation, resampled_quantile, EngineConfig,
    ResampledDistribution, WeightScheme,
};
use confreg::{PhiFunction, Sample};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_sample(rng: &mut ChaCha8Rng, k: usize, n: usize) -> Sample<f64> {
    let data = (0..k * n).map(|_| rng.random_range(-2.0..2.0)).collect();
    Sample::from_column_major(k, n, data).unwrap()
}

/// Brute-force law of `φ(n⁻¹ Σ εᵢ Xⁱ)` over all sign vectors.
fn sign_enumeration(x: &Sample<f64>, phi: &PhiFunction) -> Vec<f64> {
    let (k, n) = (x.dim(), x.len());
    (0..1u32 << n)
        .map(|mask| {
            let mut v = vec![0.0; k];
            for i in 0..n {
                let s = if mask >> i & 1 == 1 { -1.0 } else { 1.0 };
                for (c, a) in v.iter_mut().enumerate() {
                    *a += s * x.get(c, i);
                }
            }
            v.iter_mut().for_each(|a| *a /= n as f64);
            phi.eval(&v).unwrap()
        })
        .collect()
}

fn quantile_by_definition(values: &[f64], alpha: f64) -> f64 {
    let mut s = values.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = s.len() as f64;
    *s.iter()
        .find(|&&x| s.iter().filter(|&&v| v > x).count() as f64 / n <= alpha)
        .unwrap()
}

#[test]
fn exact_engine_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for case in 0..20 {
        let n = 2 + case % 8;
        let k = 1 + case % 3;
        let y = random_sample(&mut rng, k, n);
        let centered = y.center_columns();
        let scheme = WeightScheme::rademacher(n).unwrap();
        let brute = sign_enumeration(&centered, &PhiFunction::SUP_ABS);
        let e = resampled_expectation(&y, &scheme, &PhiFunction::SUP_ABS, &EngineConfig::exact()).unwrap();
        let want = brute.iter().sum::<f64>() / brute.len() as f64;
        assert!((e.value - want).abs() < 1e-12);
        assert_eq!(e.stderr, 0.0);
        for alpha in [0.05, 0.1, 0.3, 0.5] {
            let q = resampled_quantile(&centered, &scheme, &PhiFunction::SUP_ABS, alpha, &EngineConfig::exact())
                .unwrap();
            assert!((q - quantile_by_definition(&brute, alpha)).abs() < 1e-12);
        }
    }
}

#[test]
fn monte_carlo_agrees_with_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let draws = 100_000;
    for case in 0..50u64 {
        let n = 3 + (case as usize) % 8;
        let k = 1 + (case as usize) % 3;
        let y = random_sample(&mut rng, k, n);
        let centered = y.center_columns();
        let scheme = WeightScheme::rademacher(n).unwrap();
        let phi = PhiFunction::SUP_ABS;
        let exact = resampled_distributions(&centered, &scheme, &[phi], &EngineConfig::exact())
            .unwrap()
            .remove(0);
        let mc_cfg = EngineConfig::monte_carlo(draws, 1000 + case);
        let e = resampled_expectation(&y, &scheme, &phi, &mc_cfg).unwrap();
        let ee = exact.expectation().value;
        assert!((e.value - ee).abs() <= 4.0 * e.stderr, "case {case}: {} vs {ee} ± {}", e.value, e.stderr);

        for alpha in [0.05, 0.1, 0.25] {
            let q = resampled_quantile(&centered, &scheme, &phi, alpha, &mc_cfg).unwrap();
            let q_exact = exact.upper_quantile(alpha).unwrap();
            check_quantile_agreement(&exact, q, q_exact, alpha, draws, case);
        }
    }
}

/// The Monte Carlo quantile must be an exact quantile at a level within four
/// binomial standard errors of `alpha`, and, when atoms carry more mass than
/// that tolerance, within one atom of the exact quantile.
fn check_quantile_agreement(
    exact: &ResampledDistribution<f64>,
    q: f64,
    q_exact: f64,
    alpha: f64,
    draws: usize,
    case: u64,
) {
    let tol = 4.0 * (alpha * (1.0 - alpha) / draws as f64).sqrt();
    assert!(exact.exceedance(q) <= alpha + tol, "case {case}: P(V>q) too large");
    assert!(exact.exceedance_or_equal(q) >= alpha - tol, "case {case}: P(V≥q) too small");
    let mut atoms = exact.values().to_vec();
    atoms.sort_by(|a, b| a.partial_cmp(b).unwrap());
    atoms.dedup();
    let pos = |x: f64| atoms.iter().position(|&a| (a - x).abs() <= 1e-12 * (1.0 + x.abs())).unwrap();
    if 1.0 / exact.values().len() as f64 > tol {
        assert!(pos(q).abs_diff(pos(q_exact)) <= 1, "case {case}: more than one atom apart");
    }
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let y = random_sample(&mut rng, 5, 40);
    let scheme = WeightScheme::efron(40).unwrap();
    let cfg = EngineConfig::monte_carlo(3000, 77);
    let phis = [PhiFunction::SUP, PhiFunction::pnorm(2.0).unwrap()];
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| resampled_distributions(&y, &scheme, &phis, &cfg).unwrap())
    };
    let one = run(1);
    assert_eq!(one, run(4));
    assert_eq!(one, run(7));
}

#[test]
fn exchangeable_schemes_ignore_column_order_in_exact_mode() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let y = random_sample(&mut rng, 3, 8);
    let cols: Vec<Vec<f64>> = y.columns().map(|c| c.to_vec()).rev().collect();
    let rev = Sample::from_columns(&cols).unwrap();
    for scheme in [
        WeightScheme::rademacher(8).unwrap(),
        WeightScheme::leave_one_out(8).unwrap(),
        WeightScheme::random_hold_out(8, 4).unwrap(),
    ] {
        let a = resampled_expectation(&y, &scheme, &PhiFunction::SUP_ABS, &EngineConfig::exact()).unwrap();
        let b = resampled_expectation(&rev, &scheme, &PhiFunction::SUP_ABS, &EngineConfig::exact()).unwrap();
        assert!((a.value - b.value).abs() < 1e-12, "{scheme}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn quantile_is_sign_invariant(
        n in 2usize..=9,
        k in 1usize..=3,
        seed in any::<u64>(),
        signs in prop::collection::vec(any::<bool>(), 9),
        alpha in 0.01f64..0.6,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let y = random_sample(&mut rng, k, n);
        let flipped = y.reweight_signs(&signs[..n]).unwrap();
        let scheme = WeightScheme::rademacher(n).unwrap();
        let cfg = EngineConfig::exact();
        let a = resampled_quantile(&y, &scheme, &PhiFunction::SUP_ABS, alpha, &cfg).unwrap();
        let b = resampled_quantile(&flipped, &scheme, &PhiFunction::SUP_ABS, alpha, &cfg).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
    }

    #[test]
    fn expectation_is_translation_invariant(
        n in 2usize..=8,
        seed in any::<u64>(),
        shift in prop::collection::vec(-50.0f64..50.0, 2),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let y = random_sample(&mut rng, 2, n);
        let cols: Vec<Vec<f64>> = y.columns().map(|c| vec![c[0] + shift[0], c[1] + shift[1]]).collect();
        let moved = Sample::from_columns(&cols).unwrap();
        for scheme in [WeightScheme::rademacher(n).unwrap(), WeightScheme::leave_one_out(n).unwrap()] {
            let a = resampled_expectation(&y, &scheme, &PhiFunction::SUP, &EngineConfig::exact()).unwrap();
            let b = resampled_expectation(&moved, &scheme, &PhiFunction::SUP, &EngineConfig::exact()).unwrap();
            prop_assert!((a.value - b.value).abs() < 1e-9);
        }
    }

    #[test]
    fn quantile_sandwich_and_monotonicity(
        n in 2usize..=10,
        seed in any::<u64>(),
        a1 in 0.01f64..0.9,
        a2 in 0.01f64..0.9,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let y = random_sample(&mut rng, 2, n).center_columns();
        let scheme = WeightScheme::rademacher(n).unwrap();
        let dist = resampled_distributions(&y, &scheme, &[PhiFunction::SUP_ABS], &EngineConfig::exact())
            .unwrap()
            .remove(0);
        let (lo, hi) = if a1 < a2 { (a1, a2) } else { (a2, a1) };
        let q_lo = dist.upper_quantile(lo).unwrap();
        let q_hi = dist.upper_quantile(hi).unwrap();
        prop_assert!(q_hi <= q_lo);
        prop_assert!(dist.exceedance(q_lo) <= lo);
        prop_assert!(dist.exceedance_or_equal(q_lo) >= lo);
    }
}
