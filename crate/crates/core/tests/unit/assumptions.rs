use super::*;

#[test]
fn standard_normal_regularity_moments() {
    let law = GaussianLaw::standard(1);
    let kernel = KernelSpec::new(KernelId::Gaussian, 1).unwrap();
    let report = check_assumption_r(&law, 1, 1, 0.01, &kernel).unwrap();
    // E|½ln(2π) + X²/2| = ½ln(2π) + ½ since the argument is positive.
    let want = 0.5 * log(2.0 * core::f64::consts::PI) + 0.5;
    assert!(fabs(report.log_density_moment.unwrap() - want) < 1e-9);
    assert!(fabs(report.score_fourth_moment.unwrap() - 3.0) < 1e-9);
    assert!(fabs(report.laplacian_ratio_moment.unwrap() - 2.0) < 1e-9);
    assert!(report.r1_finite());
}

#[test]
fn two_dimensional_law_uses_full_precision() {
    // Var = 4 per coordinate: E|∇log p|⁴ = E(|X|²/16)² = (2·3 + 2)·16/256 = 0.5
    let law = GaussianLaw::diagonal(vec![1.0, -2.0], &[4.0, 4.0]).unwrap();
    let kernel = KernelSpec::new(KernelId::Gaussian, 1).unwrap();
    let report = check_assumption_r(&law, 2, 1, 0.01, &kernel).unwrap();
    assert!(fabs(report.score_fourth_moment.unwrap() - 0.5) < 1e-9);
    assert_eq!(report.r1.len(), 2);
}

#[test]
fn shape_errors() {
    let law = GaussianLaw::standard(2);
    let kernel = KernelSpec::new(KernelId::Gaussian, 1).unwrap();
    assert!(check_assumption_r(&law, 1, 1, 0.01, &kernel).is_err());
    assert!(check_assumption_r(&law, 2, 1, 0.0, &kernel).is_err());
    let point = InitialLaw::Dirac(vec![0.0, 0.0]);
    assert!(matches!(
        check_assumption_r_law(&point, 2, 1, 0.01, &kernel),
        Err(Error::UnsupportedLaw(_))
    ));
}
