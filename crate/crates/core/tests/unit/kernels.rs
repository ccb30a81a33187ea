use super::*;
use crate::math::normal_pdf;

fn k(id: KernelId, d: usize) -> KernelSpec {
    KernelSpec::new(id, d).unwrap()
}

#[test]
fn origin_values() {
    let g = k(KernelId::Gaussian, 1);
    let inv_sqrt_2pi = 0.398_942_280_401_432_7;
    assert!(fabs(eval_scaled(&g, 1.0, &[0.0]).unwrap() - inv_sqrt_2pi) < 1e-16);
    assert!(fabs(eval_scaled(&g, 0.25, &[0.0]).unwrap() - 2.0 * inv_sqrt_2pi) < 1e-15);
    let e = k(KernelId::Epanechnikov, 1);
    assert_eq!(eval_scaled(&e, 1.0, &[2.0]).unwrap(), 0.0);
    assert_eq!(eval_scaled(&e, 1.0, &[0.0]).unwrap(), 0.75);
    assert!(matches!(
        eval_scaled(&g, 0.0, &[0.0]),
        Err(Error::InvalidParameter { name: "h", .. })
    ));
    assert!(eval_scaled(&g, -1.0, &[0.0]).is_err());
}

#[test]
fn scaled_second_moment_by_quadrature() {
    // Independent oracle: trapezoid on a fine grid of the normal density
    // with standard deviation 0.2.
    let oracle = math::trapezoid(|z| z * z * normal_pdf(z / 0.2) / 0.2, -3.0, 3.0, 60_000);
    let sk = ScaledKernel::new(k(KernelId::Gaussian, 1), 0.04).unwrap();
    let via_kernel = math::trapezoid(|z| z * z * sk.eval(&[z]), -3.0, 3.0, 60_000);
    assert!(fabs(oracle - 0.04) < 1e-6);
    assert!(fabs(via_kernel - 0.04) < 1e-6);
}

#[test]
fn assumption_k_on_gaussian() {
    let r = check_assumption_k(&k(KernelId::Gaussian, 1)).unwrap();
    assert!(r.all_pass(), "{r:?}");
    assert!(fabs(r.exp_moment.value - core::f64::consts::SQRT_2) < 1e-9);
    assert!(fabs(r.mass.value - 1.0) < 1e-12);
}

#[test]
fn assumption_k_rejects_shifted_density() {
    let shifted: DensityFn = Arc::new(|z: &[f64]| normal_pdf(z[0] - 1.0));
    let spec = KernelSpec::custom(
        "shifted-gaussian",
        1,
        shifted,
        f64::INFINITY,
        normal_pdf(0.0),
    )
    .unwrap();
    let r = check_assumption_k(&spec).unwrap();
    assert!(r.mass.pass);
    assert!(!r.mean_check.pass);
    assert!(fabs(r.mean[0] - 1.0) < 1e-9);
    assert!(!r.symmetric.pass);
}

#[test]
fn assumption_k_compact_kernels() {
    for id in [KernelId::Epanechnikov, KernelId::UniformBall] {
        let r = check_assumption_k(&k(id, 1)).unwrap();
        assert!(r.all_pass(), "{id}: {r:?}");
        assert!(fabs(r.mass.value - 1.0) < 1e-8, "{id}");
        assert!(r.exp_moment.value.is_finite() && r.exp_moment.value > 1.0);
    }
}

#[test]
fn second_moments() {
    assert!(fabs(second_moment(&k(KernelId::Gaussian, 1)).unwrap() - 1.0) < 1e-6);
    assert!(fabs(second_moment(&k(KernelId::Epanechnikov, 1)).unwrap() - 0.2) < 1e-6);
    assert!(fabs(second_moment(&k(KernelId::UniformBall, 1)).unwrap() - 1.0 / 3.0) < 1e-6);
    assert!(matches!(
        second_moment(&k(KernelId::Gaussian, 3)),
        Err(Error::UnsupportedDimension { dim: 3, .. })
    ));
    assert!(check_assumption_k(&k(KernelId::Gaussian, 3)).is_err());
}

#[test]
fn two_dimensional_kernels() {
    let r = check_assumption_k(&k(KernelId::Gaussian, 2)).unwrap();
    assert!(r.all_pass());
    // ∫ φ₂(z) e^{|z|²/4} = 2.
    assert!(fabs(r.exp_moment.value - 2.0) < 1e-8);
    assert!(fabs(second_moment(&k(KernelId::Gaussian, 2)).unwrap() - 2.0) < 1e-6);
    let e = check_assumption_k(&k(KernelId::Epanechnikov, 2)).unwrap();
    assert!(e.mass.pass && e.mean_check.pass, "{e:?}");
}

#[test]
fn scaled_mass_and_mean_for_every_bandwidth() {
    for id in KernelId::ALL {
        for h in [1.0, 0.1, 0.01] {
            let sk = ScaledKernel::new(k(id, 1), h).unwrap();
            let half = sk.scaled_support().min(12.0 * sqrt(h));
            let mass = math::simpson(|z| sk.eval(&[z]), -half, half, 20_000);
            let mean = math::simpson(|z| z * sk.eval(&[z]), -half, half, 20_000);
            assert!(fabs(mass - 1.0) < 1e-8, "{id} h={h} mass={mass}");
            assert!(fabs(mean) < 1e-12, "{id} h={h}");
        }
    }
}

#[test]
fn compact_kernels_vanish_outside_scaled_support() {
    for id in [KernelId::Epanechnikov, KernelId::UniformBall] {
        for d in 1..=3 {
            let sk = ScaledKernel::new(k(id, d), 0.09).unwrap();
            let mut z = vec![0.0; d];
            z[0] = 0.3 * (1.0 + 1e-12);
            assert_eq!(sk.eval(&z), 0.0);
            z[0] = 0.299;
            assert!(sk.eval(&z) > 0.0);
        }
    }
}

#[test]
fn kernel_samples_have_unit_kernel_moments() {
    for id in KernelId::ALL {
        let spec = k(id, 1);
        let mut rng = CounterRng::new(3, Domain::Auxiliary, 0, 0);
        let mut z = [0.0];
        let n = 100_000;
        let mut s2 = 0.0;
        for _ in 0..n {
            spec.sample(&mut rng, &mut z).unwrap();
            s2 += z[0] * z[0];
        }
        let want = second_moment(&spec).unwrap();
        assert!(fabs(s2 / n as f64 - want) < 0.02 * want, "{id}");
    }
}

#[test]
fn kernel_ids_parse() {
    for id in KernelId::ALL {
        assert_eq!(id.as_str().parse::<KernelId>().unwrap(), id);
    }
    assert!("cauchy".parse::<KernelId>().is_err());
}

proptest::proptest! {
    #[test]
    fn scaling_identity_is_exact(z in -5.0f64..5.0, w in -5.0f64..5.0, h in 1e-3f64..4.0) {
        for id in KernelId::ALL {
            let base = k(id, 2);
            let sk = ScaledKernel::new(base.clone(), h).unwrap();
            let inv = 1.0 / sqrt(h);
            let direct = pow(h, -1.0) * base.density(&[z * inv, w * inv]);
            proptest::prop_assert_eq!(sk.eval(&[z, w]), direct);
            if id != KernelId::UniformBall {
                // Division by √h differs from multiplication by 1/√h only in rounding.
                let divided = pow(h, -1.0) * base.density(&[z / sqrt(h), w / sqrt(h)]);
                proptest::prop_assert!(fabs(sk.eval(&[z, w]) - divided) <= 1e-13 * pow(h, -1.0));
            }
        }
    }

    #[test]
    fn shipped_kernels_are_symmetric(z in -3.0f64..3.0) {
        for id in KernelId::ALL {
            let base = k(id, 1);
            proptest::prop_assert_eq!(base.density(&[z]), base.density(&[-z]));
        }
    }
}
