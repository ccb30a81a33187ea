use super::*;

#[test]
fn fast_exp_matches_libm() {
    let mut worst: f64 = 0.0;
    let mut x = -740.0;
    while x < 709.5 {
        let want = libm::exp(x);
        if want > 0.0 && want.is_finite() {
            worst = worst.max(fabs(exp(x) - want) / want);
        }
        x += 0.0137;
    }
    assert!(worst < 5e-16, "worst relative error {worst:e}");
    assert_eq!(exp(0.0), 1.0);
    assert_eq!(exp(f64::NEG_INFINITY), 0.0);
    assert!(exp(f64::NAN).is_nan());
    assert_eq!(exp(1000.0), f64::INFINITY);
}

#[test]
fn exp_nonpositive_matches_libm() {
    let mut worst: f64 = 0.0;
    let mut x = -707.9;
    while x <= 0.0 {
        let want = libm::exp(x);
        worst = worst.max(fabs(exp_nonpositive(x) - want) / want);
        x += 0.00731;
    }
    assert!(worst < 1e-15, "worst relative error {worst:e}");
    assert_eq!(exp_nonpositive(0.0), 1.0);
    assert_eq!(exp_nonpositive(-800.0), 0.0);
    assert_eq!(exp_nonpositive(f64::NEG_INFINITY), 0.0);
    assert!(exp_nonpositive(f64::NAN).is_nan());
}

#[test]
fn quantile_inverts_cdf() {
    for &p in &[
        1e-300, 1e-20, 1e-8, 0.001, 0.02425, 0.1, 0.3, 0.5, 0.7, 0.975, 0.999_999,
    ] {
        let z = normal_quantile(p);
        let back = normal_cdf(z);
        // Φ amplifies a relative error in z by about z².
        assert!(
            fabs(back - p) <= 1e-14 * (1.0 + z * z) * p,
            "p={p} z={z} back={back}"
        );
    }
    assert_eq!(normal_quantile(0.5), 0.0);
    assert!((normal_quantile(0.975) - 1.959_963_984_540_054).abs() < 1e-15);
    assert_eq!(normal_quantile(0.0), f64::NEG_INFINITY);
    assert!(normal_quantile(1.5).is_nan());
}

#[test]
fn compensated_sum_recovers_cancellation() {
    let v = [1.0, 1e100, 1.0, -1e100];
    assert_eq!(compensated_sum(&v), 2.0);
}

#[test]
fn quadrature_rules() {
    let t = trapezoid(normal_pdf, -12.0, 12.0, 2000);
    assert!(fabs(t - 1.0) < 1e-14);
    let s = simpson(|x| x * x * x * x, 0.0, 1.0, 10);
    assert!(fabs(s - 0.2) < 2e-5);
    let (n, w) = simpson_nodes(-1.0, 1.0, 7);
    assert_eq!(n.len(), 9);
    let cubic: f64 = n.iter().zip(&w).map(|(x, w)| w * (x * x * x + x * x)).sum();
    assert!(fabs(cubic - 2.0 / 3.0) < 1e-14);
}

#[test]
fn cholesky_solves() {
    let a = [4.0, 2.0, 2.0, 3.0];
    let l = cholesky(&a, 2).unwrap();
    let y = forward_solve(&l, 2, &[2.0, 1.0]);
    let x = backward_solve(&l, 2, &y);
    assert!(fabs(4.0 * x[0] + 2.0 * x[1] - 2.0) < 1e-14);
    assert!(fabs(2.0 * x[0] + 3.0 * x[1] - 1.0) < 1e-14);
    assert!(cholesky(&[1.0, 2.0, 2.0, 1.0], 2).is_none());
}

#[test]
fn ball_volumes() {
    assert_eq!(unit_ball_volume(1), 2.0);
    assert!(fabs(unit_ball_volume(2) - core::f64::consts::PI) < 1e-15);
    assert!(fabs(unit_ball_volume(3) - 4.0 / 3.0 * core::f64::consts::PI) < 1e-15);
}

#[test]
fn entropy_gap_is_continuous_at_switch() {
    let below = entropy_gap(0.999_999_9e-3);
    let above = entropy_gap(1.000_000_1e-3);
    assert!(fabs(below - above) / below < 1e-6);
}

#[test]
fn entropy_gap_series_agrees() {
    for &u in &[-9e-4, -1e-5, 1e-7, 5e-4, 9.9e-4] {
        let series: f64 = (2..30)
            .map(|k| pow(-u, k as f64) / (k * (k - 1)) as f64)
            .sum();
        assert!(fabs(entropy_gap(u) - series) <= 1e-15 * series);
    }
}
