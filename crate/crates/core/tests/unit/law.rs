use super::*;

fn sample_std(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    math::sqrt(values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0))
}

#[test]
fn gaussian_law_validation() {
    assert!(matches!(
        GaussianLaw::new(vec![0.0, 0.0], vec![1.0, 0.5, 0.4, 1.0]),
        Err(Error::NotPositiveDefinite)
    ));
    assert!(matches!(
        GaussianLaw::new(vec![0.0, 0.0], vec![1.0, 2.0, 2.0, 1.0]),
        Err(Error::NotPositiveDefinite)
    ));
    assert!(GaussianLaw::new(vec![0.0], vec![1.0, 0.0]).is_err());
    let g = GaussianLaw::new(vec![1.0, -1.0], vec![2.0, 0.5, 0.5, 1.0]).unwrap();
    let p = g.precision();
    // Σ Σ⁻¹ = I
    for r in 0..2 {
        for c in 0..2 {
            let v: f64 = (0..2)
                .map(|k| g.covariance()[r * 2 + k] * p[k * 2 + c])
                .sum();
            assert!(fabs(v - if r == c { 1.0 } else { 0.0 }) < 1e-14);
        }
    }
    let x = [0.3, 0.2];
    let d = [x[0] - 1.0, x[1] + 1.0];
    let direct = d[0] * (p[0] * d[0] + p[1] * d[1]) + d[1] * (p[2] * d[0] + p[3] * d[1]);
    assert!(fabs(g.precision_form(&d) - direct) < 1e-14);
}

#[test]
fn standard_normal_density() {
    let g = GaussianLaw::standard(1);
    assert!(fabs(g.density(&[0.0]) - 0.398_942_280_401_432_7) < 1e-15);
    assert!(fabs(g.sup_density() - 0.398_942_280_401_432_7) < 1e-15);
}

#[test]
fn sampling_is_seeded_and_correlated() {
    let g = GaussianLaw::new(vec![0.0, 0.0], vec![1.0, 0.8, 0.8, 1.0]).unwrap();
    let law = InitialLaw::Gaussian(g);
    let mut a = [0.0; 2];
    let mut b = [0.0; 2];
    law.sample(5, 17, &mut a);
    law.sample(5, 17, &mut b);
    assert_eq!(a, b);
    let n = 50_000;
    let mut sxy = 0.0;
    let mut xs = Vec::with_capacity(n);
    for k in 0..n {
        law.sample(9, k as u64, &mut a);
        sxy += a[0] * a[1];
        xs.push(a[0]);
    }
    assert!(fabs(sxy / n as f64 - 0.8) < 0.03);
    assert!(fabs(sample_std(&xs) - 1.0) < 0.02);
}
