use cmkv_core::divergences::{
    chi2, d_p, gaussian_kl, gaussian_renyi_d, histogram_tv, histogram_tv_samples, inequality_suite, kl,
    mollification_entropy, tv, Axis, Density1d, DiscreteDistribution, HistogramGrid, Marginal, Overflow, Quantity,
};
use cmkv_core::models::{GaussianLaw, InitialLaw};
use cmkv_core::{Error, KernelId, KernelSpec, ParticleEnsemble};
use proptest::prelude::*;

fn dist(p: &[f64]) -> DiscreteDistribution {
    DiscreteDistribution::new(p.to_vec()).unwrap()
}

fn normal_pdf(x: f64, mean: f64, var: f64) -> f64 {
    (-(x - mean) * (x - mean) / (2.0 * var)).exp() / (2.0 * std::f64::consts::PI * var).sqrt()
}

/// Composite Simpson on `[lo, hi]`.
fn simpson(f: impl Fn(f64) -> f64, lo: f64, hi: f64, intervals: usize) -> f64 {
    let h = (hi - lo) / intervals as f64;
    let mut s = f(lo) + f(hi);
    for i in 1..intervals {
        s += f(lo + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

fn gauss1(mean: f64, var: f64) -> GaussianLaw {
    GaussianLaw::diagonal(vec![mean], &[var]).unwrap()
}

fn gaussian_kernel() -> KernelSpec {
    KernelSpec::new(KernelId::Gaussian, 1).unwrap()
}

fn draw(law: &GaussianLaw, n: usize, seed: u64) -> Vec<f64> {
    let law = InitialLaw::Gaussian(law.clone());
    let mut out = vec![0.0; 1];
    (0..n)
        .map(|k| {
            law.sample(seed, k as u64, &mut out);
            out[0]
        })
        .collect()
}

#[test]
fn two_point_example() {
    let a = dist(&[0.9, 0.1]);
    let b = dist(&[0.5, 0.5]);
    assert!((tv(&a, &b).unwrap() - 0.8).abs() < 1e-15);
    let expected_kl = 0.9 * 1.8f64.ln() + 0.1 * 0.2f64.ln();
    assert!((kl(&a, &b).unwrap() - expected_kl).abs() < 1e-15);
    assert!((chi2(&a, &b).unwrap() - 0.64).abs() < 1e-15);
    assert!((d_p(&a, &b, 4.0).unwrap() - (0.9f64.powi(4) + 0.1f64.powi(4)) / 0.125).abs() < 1e-13);
    assert!((d_p(&a, &b, 1.0).unwrap() - 1.0).abs() < 1e-15);
}

#[test]
fn off_support_is_infinite() {
    let a = dist(&[0.5, 0.5]);
    let b = dist(&[1.0, 0.0]);
    assert_eq!(kl(&a, &b).unwrap(), f64::INFINITY);
    assert_eq!(chi2(&a, &b).unwrap(), f64::INFINITY);
    assert_eq!(d_p(&a, &b, 2.0).unwrap(), f64::INFINITY);
    assert_eq!(kl(&b, &a).unwrap(), 2f64.ln());
    assert!((tv(&a, &b).unwrap() - 1.0).abs() < 1e-15);
}

#[test]
fn malformed_inputs_are_rejected() {
    assert!(DiscreteDistribution::new(vec![0.5, 0.6]).is_err());
    assert!(DiscreteDistribution::new(vec![-0.1, 1.1]).is_err());
    assert!(DiscreteDistribution::new(vec![]).is_err());
    let a = dist(&[1.0]);
    let b = dist(&[0.5, 0.5]);
    assert!(matches!(tv(&a, &b), Err(Error::AlphabetMismatch { .. })));
    assert!(d_p(&b, &b, 0.5).is_err());
}

#[test]
fn gaussian_kl_example_matches_quadrature() {
    let (p, q) = (gauss1(0.0, 1.0), gauss1(0.0, 1.01));
    let closed = 0.5 * (1.01f64.ln() + 1.0 / 1.01 - 1.0);
    let quad = simpson(
        |x| {
            let a = normal_pdf(x, 0.0, 1.0);
            a * (a / normal_pdf(x, 0.0, 1.01)).ln()
        },
        -15.0,
        15.0,
        6000,
    );
    let got = gaussian_kl(&p, &q).unwrap();
    // Both forms cancel O(1) terms down to O(h²); agreement is ~1e-11 relative.
    assert!((got - closed).abs() < 1e-9 * closed);
    assert!((got - quad).abs() < 1e-9 * closed);
    assert!((got - 2.4670e-5).abs() < 1e-9);
}

#[test]
fn gaussian_kl_multivariate() {
    let p = GaussianLaw::new(vec![1.0, 0.0], vec![2.0, 0.3, 0.3, 1.0]).unwrap();
    let q = GaussianLaw::standard(2);
    // ½[tr Σ + |μ|² - 2 - ln det Σ]
    let expected = 0.5 * (3.0 + 1.0 - 2.0 - (2.0f64 - 0.09).ln());
    assert!((gaussian_kl(&p, &q).unwrap() - expected).abs() < 1e-14);
    assert_eq!(gaussian_kl(&q, &q).unwrap(), 0.0);
}

#[test]
fn d4_shift_example() {
    let v = gaussian_renyi_d(&gauss1(0.5, 1.0), &gauss1(0.0, 1.0), 4.0).unwrap();
    assert!((v - 1.5f64.exp()).abs() < 1e-13);
    assert!((v - 4.4817).abs() < 1e-4);
    let quad = simpson(
        |x| (-2.0 * (x - 0.5) * (x - 0.5) + 1.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt(),
        -20.0,
        25.0,
        9000,
    );
    assert!((v - quad).abs() < 1e-9 * v, "{v} vs {quad}");
    assert!(gaussian_renyi_d(&gauss1(0.0, 1.0), &gauss1(0.0, 2.0), 2.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn renyi_matches_quadrature(a in -1.5f64..1.5, b in -1.5f64..1.5, var in 0.5f64..2.0, order in 1.0f64..4.0) {
        let v = gaussian_renyi_d(&gauss1(a, var), &gauss1(b, var), order).unwrap();
        let sd = var.sqrt();
        let lo = a.min(b) - 40.0 * sd;
        let hi = a.max(b) + 40.0 * sd;
        // Integrate (p/q)^α q in log space to keep the tails finite.
        let quad = simpson(
            |x| {
                let lp = -(x - a) * (x - a) / (2.0 * var);
                let lq = -(x - b) * (x - b) / (2.0 * var);
                (order * lp + (1.0 - order) * lq).exp() / (2.0 * std::f64::consts::PI * var).sqrt()
            },
            lo,
            hi,
            20_000,
        );
        prop_assert!((v - quad).abs() < 1e-8 * v, "{} vs {}", v, quad);
    }

    #[test]
    fn tv_is_a_metric(
        raw in proptest::collection::vec((0.0f64..1.0, 0.0f64..1.0, 0.0f64..1.0), 2..16),
    ) {
        let a = DiscreteDistribution::from_weights(&raw.iter().map(|t| t.0 + 1e-3).collect::<Vec<_>>()).unwrap();
        let b = DiscreteDistribution::from_weights(&raw.iter().map(|t| t.1 + 1e-3).collect::<Vec<_>>()).unwrap();
        let c = DiscreteDistribution::from_weights(&raw.iter().map(|t| t.2 + 1e-3).collect::<Vec<_>>()).unwrap();
        let ab = tv(&a, &b).unwrap();
        prop_assert_eq!(ab, tv(&b, &a).unwrap());
        prop_assert_eq!(tv(&a, &a).unwrap(), 0.0);
        prop_assert!((0.0..=2.0).contains(&ab));
        prop_assert!(ab <= tv(&a, &c).unwrap() + tv(&c, &b).unwrap() + 1e-15);
        let k = kl(&a, &b).unwrap();
        prop_assert!(k >= 0.0);
        prop_assert!(ab * ab / 2.0 <= k * (1.0 + 1e-12) + 1e-300);
        prop_assert!(k <= chi2(&a, &b).unwrap() * (1.0 + 1e-12));
    }
}

#[test]
fn inequality_suite_has_no_violations() {
    let report = inequality_suite(1_000, 2024).unwrap();
    assert_eq!(report.trials(), 1_000);
    assert_eq!(report.violation_count(), 0, "{:?}", report.violations().next());
    for q in Quantity::ALL {
        assert_eq!(report.rows.iter().filter(|r| r.quantity == q).count(), 1_000, "{}", q.as_str());
    }
    assert_eq!(report, inequality_suite(1_000, 2024).unwrap());
}

#[test]
fn mollification_entropy_of_a_gaussian() {
    let pdf = |x: f64| normal_pdf(x, 0.0, 1.0);
    let k = gaussian_kernel();
    for h in [0.1, 0.01] {
        let got = mollification_entropy(Density1d::new(&pdf), &k, h).unwrap();
        let closed = gaussian_kl(&gauss1(0.0, 1.0), &gauss1(0.0, 1.0 + h)).unwrap();
        assert!((got - closed).abs() < 1e-8, "h={h}: {got} vs {closed}");
    }
    for h in [1e-2, 1e-3] {
        let ratio = mollification_entropy(Density1d::new(&pdf), &k, h).unwrap() / (h * h / 4.0);
        assert!((0.95..=1.05).contains(&ratio), "h={h}: {ratio}");
    }
    assert!(mollification_entropy(Density1d::new(&pdf), &k, 1e-6).unwrap() < 1e-9);
}

#[test]
fn mollification_entropy_grows_with_h() {
    let pdf = |x: f64| 0.5 * normal_pdf(x, -1.0, 0.5) + 0.5 * normal_pdf(x, 1.5, 1.0);
    for kernel in [gaussian_kernel(), KernelSpec::new(KernelId::Epanechnikov, 1).unwrap()] {
        let mut last = 0.0;
        for h in [1e-3, 1e-2, 0.05, 0.1, 0.3] {
            let v = mollification_entropy(Density1d::new(&pdf).with_location(0.25, 1.2), &kernel, h).unwrap();
            assert!(v > last, "{:?} at h={h}: {v} <= {last}", kernel.name());
            last = v;
        }
    }
}

#[test]
fn heavy_tails_are_reported() {
    let cauchy = |x: f64| 1.0 / (std::f64::consts::PI * (1.0 + x * x));
    assert!(matches!(
        mollification_entropy(Density1d::new(&cauchy), &gaussian_kernel(), 0.01),
        Err(Error::DomainTruncated { .. })
    ));
}

#[test]
fn histogram_tv_of_shifted_normals() {
    let n = 100_000;
    let a = draw(&gauss1(0.0, 1.0), n, 1);
    let b = draw(&gauss1(3.0, 1.0), n, 2);
    let grid = HistogramGrid::new(vec![Axis::new(-6.0, 9.0, 150).unwrap()], Overflow::Clamp).unwrap();
    let got = histogram_tv_samples(&a, &b, &grid).unwrap();
    let exact = 2.0 * (2.0 * cmkv_core::math::normal_cdf(1.5) - 1.0);
    assert!((exact - 1.732772).abs() < 1e-6);
    assert!((got - exact).abs() < 0.05 * exact, "{got} vs {exact}");
    assert_eq!(histogram_tv_samples(&a, &a, &grid).unwrap(), 0.0);
}

#[test]
fn histogram_tv_reads_ensemble_marginals() {
    let n = 20_000;
    let x = draw(&gauss1(0.0, 1.0), 2 * n, 3);
    let y = draw(&gauss1(0.0, 1.0), 2 * n, 4);
    let e1 = ParticleEnsemble::new(x.clone(), n, 2, 1, 0.0).unwrap();
    let e2 = ParticleEnsemble::new(y, n, 2, 1, 0.0).unwrap();
    let grid = HistogramGrid::covering(&[&x], 40).unwrap();
    let m = Marginal { block: 1, component: Some(0) };
    let v = histogram_tv(&e1, &e2, m, &grid).unwrap();
    assert!(v < 0.1, "{v}");
    let manual = histogram_tv_samples(&e1.marginal(1, 0), &e2.marginal(1, 0), &grid).unwrap();
    assert_eq!(v, manual);
    assert!(histogram_tv(&e1, &e2, Marginal { block: 2, component: None }, &grid).is_err());
    let reject = HistogramGrid::new(vec![Axis::new(-1.0, 1.0, 10).unwrap()], Overflow::Reject).unwrap();
    assert!(histogram_tv_samples(&[5.0], &[0.0], &reject).is_err());
}
