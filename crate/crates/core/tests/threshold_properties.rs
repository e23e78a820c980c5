use confreg::phi::PExponent;
use confreg::resampling::{resampled_expectation, scheme_constants, EngineConfig, ResamplingConstants, WeightScheme};
use confreg::thresholds::{
    bonferroni_threshold, compound_threshold, conc_bounded_thresholds, conc_gaussian_threshold,
    inv_normal_upper, lp_risk_interval, single_test_threshold, BoundedAssumption, CompoundBranch,
    Direction, Sided,
};
use confreg::{PhiFunction, Sample};
use proptest::prelude::*;

const NS: [usize; 9] = [2, 3, 5, 10, 30, 100, 300, 1000, 10_000];
const ALPHAS: [f64; 8] = [0.3, 0.2, 0.1, 0.05, 0.02, 0.01, 1e-3, 1e-5];

fn loo_constants() -> ResamplingConstants {
    scheme_constants(&WeightScheme::leave_one_out(20).unwrap()).unwrap()
}

/// Evaluates `f` on the `(n, α)` grid and checks strict decrease along both
/// increasing `n` and increasing `α`.
fn check_grid(name: &str, f: impl Fn(usize, f64) -> f64) {
    for &a in &ALPHAS {
        let row: Vec<f64> = NS.iter().map(|&n| f(n, a)).collect();
        assert!(row.windows(2).all(|w| w[1] < w[0]), "{name}: not decreasing in n at α={a}: {row:?}");
    }
    for &n in &NS {
        let col: Vec<f64> = ALPHAS.iter().map(|&a| f(n, a)).collect();
        assert!(col.windows(2).all(|w| w[1] > w[0]), "{name}: not increasing as α falls at n={n}: {col:?}");
    }
}

#[test]
fn monotonicity_grids() {
    let c = loo_constants();
    let ba = BoundedAssumption::new(1.5, PExponent::Infinity).unwrap();
    check_grid("bonferroni", |n, a| bonferroni_threshold(1.3, n, 50, a, Sided::Two).unwrap().value);
    check_grid("bonferroni one-sided", |n, a| bonferroni_threshold(1.3, n, 50, a, Sided::One).unwrap().value);
    check_grid("single_test", |n, a| single_test_threshold(0.7, n, a, Sided::Two).unwrap().value);
    check_grid("conc_gaussian", |n, a| {
        conc_gaussian_threshold(0.25, &c, 1.0, n, a, Direction::Upper).unwrap().value
    });
    check_grid("conc_bounded", |n, a| conc_bounded_thresholds(0.25, &c, &ba, n, a).unwrap().0.value);
    check_grid("compound", |n, a| {
        let t_det = bonferroni_threshold(1.0, n, 50, a * 0.9, Sided::Two).unwrap().value;
        compound_threshold(0.25, &c, 1.0, n, a, 0.1, t_det).unwrap().value
    });
    check_grid("lp_risk upper", |n, a| lp_risk_interval(0.25, &c, 1.0, n, a).unwrap().1);
}

#[test]
fn lower_conc_thresholds_move_the_other_way() {
    let c = loo_constants();
    let ba = BoundedAssumption::new(1.0, PExponent::Infinity).unwrap();
    for &n in &NS[1..] {
        let lo = |a| conc_gaussian_threshold(0.25, &c, 1.0, n, a, Direction::Lower).unwrap().value;
        assert!(lo(0.01) < lo(0.1));
        let blo = |a| conc_bounded_thresholds(0.25, &c, &ba, n, a).unwrap().1.unwrap().value;
        assert!(blo(0.01) < blo(0.1));
    }
}

#[test]
fn bounded_lower_threshold_formula() {
    let c = scheme_constants(&WeightScheme::random_hold_out(12, 3).unwrap()).unwrap();
    let ba = BoundedAssumption::new(2.0, PExponent::Infinity).unwrap();
    let (up, lo) = conc_bounded_thresholds(0.4, &c, &ba, 12, 0.1).unwrap();
    let (a, d) = (c.a.value, c.d.unwrap().value);
    let l = (1.0f64 / 0.1).ln();
    assert!((up.value - (0.4 / a + 4.0 / 12f64.sqrt() * l.sqrt())).abs() < 1e-14);
    let want = 0.4 / d - 2.0 / 12f64.sqrt() * (1.0 + a * a / (d * d)).sqrt() * (2.0 * l).sqrt();
    assert!((lo.unwrap().value - want).abs() < 1e-14);
}

#[test]
fn compound_branch_switches_at_t_det() {
    let c = loo_constants();
    let conc = compound_threshold(0.25, &c, 1.0, 100, 0.05, 0.1, f64::INFINITY).unwrap();
    assert_eq!(conc.branch, Some(CompoundBranch::Concentration));
    let det = compound_threshold(0.25, &c, 1.0, 100, 0.05, 0.1, conc.value / 2.0).unwrap();
    assert_eq!(det.branch, Some(CompoundBranch::Deterministic));
    assert_eq!(det.value, conc.value / 2.0);
}

#[test]
fn lp_risk_interval_width_shrinks_like_one_over_n() {
    let c = loo_constants();
    let width = |n| {
        let (lo, hi) = lp_risk_interval(0.3, &c, 1.0, n, 0.05).unwrap();
        hi - lo
    };
    let z = inv_normal_upper(0.025).unwrap();
    let want = 2.0 * c.c.value / (100.0 * c.b.value) * z;
    assert!((width(100) - want).abs() < 1e-14);
    assert!((width(100) / width(1000) - 10.0).abs() < 1e-10);
    let (lo, hi) = lp_risk_interval(0.3, &c, 0.0, 100, 0.05).unwrap();
    assert_eq!(lo, hi);
}

#[test]
fn conc_threshold_ignores_column_order() {
    let cols: Vec<Vec<f64>> = (0..10)
        .map(|i| (0..3).map(|k| ((i * 7 + k * 3) as f64 * 0.37).sin()).collect())
        .collect();
    let y = Sample::from_columns(&cols).unwrap();
    let mut shuffled = cols.clone();
    shuffled.rotate_left(3);
    shuffled.swap(0, 6);
    let z = Sample::from_columns(&shuffled).unwrap();
    let scheme = WeightScheme::rademacher(10).unwrap();
    let c = scheme_constants(&scheme).unwrap();
    let t = |s: &Sample<f64>| {
        let e = resampled_expectation(s, &scheme, &PhiFunction::SUP_ABS, &EngineConfig::exact()).unwrap();
        conc_gaussian_threshold(e.value, &c, 1.0, 10, 0.05, Direction::Upper).unwrap().value
    };
    assert!((t(&y) - t(&z)).abs() < 1e-12);
}

proptest! {
    #[test]
    fn compound_never_exceeds_t_det(
        e in 0.0f64..2.0,
        sigma in 0.0f64..3.0,
        n in 2usize..5000,
        alpha in 1e-4f64..0.5,
        delta in 0.01f64..0.99,
        t_det in 0.0f64..5.0,
    ) {
        let c = loo_constants();
        let t = compound_threshold(e, &c, sigma, n, alpha, delta, t_det).unwrap();
        prop_assert!(t.value <= t_det);
    }

    #[test]
    fn two_sided_bonferroni_dominates(
        sigma in 0.01f64..3.0,
        n in 2usize..5000,
        k in 1usize..100_000,
        alpha in 1e-6f64..0.9,
    ) {
        let one = bonferroni_threshold(sigma, n, k, alpha, Sided::One).unwrap().value;
        let two = bonferroni_threshold(sigma, n, k, alpha, Sided::Two).unwrap().value;
        prop_assert!(two > one);
    }

    #[test]
    fn conc_upper_minus_lower_is_twice_the_spread(
        e in -1.0f64..2.0,
        sigma in 0.0f64..3.0,
        n in 2usize..5000,
        alpha in 1e-4f64..0.9,
    ) {
        let c = loo_constants();
        let up = conc_gaussian_threshold(e, &c, sigma, n, alpha, Direction::Upper).unwrap().value;
        let lo = conc_gaussian_threshold(e, &c, sigma, n, alpha, Direction::Lower).unwrap().value;
        let nf = n as f64;
        let spread = sigma * inv_normal_upper(alpha / 2.0).unwrap()
            * (c.c.value / (nf * c.b.value) + 1.0 / nf.sqrt());
        prop_assert!((up - lo - 2.0 * spread).abs() <= 1e-12 * (1.0 + spread));
    }
}
