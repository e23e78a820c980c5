use confreg::thresholds::{inv_normal_upper, normal_density, normal_upper_tail};

/// Mills ratio `Φ̄(z)/φ(z) = ∫₀^∞ exp(−zs − s²/2) ds` for `z ≥ 0`, by
/// composite Simpson on `[0, 12]`.
fn mills_oracle(z: f64) -> f64 {
    let upper = 12.0;
    let panels = ((upper * 1000.0 * (1.0 + z)) as usize).next_multiple_of(2);
    let h = upper / panels as f64;
    let g = |s: f64| (-z * s - 0.5 * s * s).exp();
    let mut acc = g(0.0) + g(upper);
    for i in 1..panels {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * g(i as f64 * h);
    }
    acc * h / 3.0
}

fn level_grid(points: usize) -> Vec<f64> {
    let (lo, hi) = (1e-12f64.ln(), 0.5f64.ln());
    (0..points)
        .map(|i| (lo + (hi - lo) * i as f64 / (points - 1) as f64).exp())
        .collect()
}

#[test]
fn inverse_tail_matches_quadrature_on_grid() {
    let mut worst = 0.0f64;
    for a in level_grid(1000) {
        let z = inv_normal_upper(a).unwrap();
        // first-order error in z: (Φ̄(z) − a)/φ(z)
        let err = (mills_oracle(z) - a / normal_density(z)).abs();
        worst = worst.max(err);
        assert!(err < 1e-9, "a={a:e} z={z} err={err:e}");
    }
    assert!(worst < 1e-9);
}

#[test]
fn upper_tail_matches_quadrature() {
    for i in 0..=160 {
        let z = i as f64 * 0.05;
        let want = normal_density(z) * mills_oracle(z);
        let got = normal_upper_tail(z);
        assert!(((got - want) / want).abs() < 1e-12, "z={z} got={got:e} want={want:e}");
    }
}

#[test]
fn upper_half_by_symmetry() {
    for a in level_grid(200) {
        let z = inv_normal_upper(a).unwrap();
        let w = inv_normal_upper(1.0 - a).unwrap();
        // 1 − (1 − a) differs from a by at most half an ulp of 1
        let slack = f64::EPSILON / normal_density(z);
        assert!((z + w).abs() <= 1e-12 + slack, "a={a:e}");
    }
}

#[test]
fn inverse_is_strictly_decreasing() {
    let grid = level_grid(1000);
    let z: Vec<f64> = grid.iter().map(|&a| inv_normal_upper(a).unwrap()).collect();
    assert!(z.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn reference_values() {
    assert!((inv_normal_upper(0.025).unwrap() - 1.959_964).abs() < 1e-6);
    assert!((inv_normal_upper(0.0005).unwrap() / 10.0 - 0.329_053).abs() < 1e-6);
}
