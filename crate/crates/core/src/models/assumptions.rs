use alloc::vec;
use alloc::vec::Vec;

use super::law::{GaussianLaw, InitialLaw};
use crate::error::{invalid, Error, Result};
use crate::kernels::{KernelId, KernelSpec};
use crate::math::{self, fabs, log, sqrt, CompensatedSum};
use crate::rng::{CounterRng, Domain};

/// How an R.1 value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum R1Method {
    /// Gaussian kernel: the kernel expectation is a closed-form determinant,
    /// leaving a tensor Simpson rule over `(s, u)`.
    Quadrature,
    /// Sampled `(s, u, z₁, z₂)` with the Gaussian-shift closed form inside.
    MonteCarlo { samples: usize },
}

/// The R.1 integral `∫∫∫∫ D₄(μ₀ ⋆_i δ_{√h(s u z₁ + z₂)} ‖ μ₀) dK dK ds du`
/// for one block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct R1Estimate {
    pub block: usize,
    pub value: f64,
    /// Zero for quadrature.
    pub std_error: f64,
    pub finite: bool,
    pub method: R1Method,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionRReport {
    pub h: f64,
    pub r1: Vec<R1Estimate>,
    /// All polynomial moments finite.
    pub moments_finite: bool,
    /// `∫ |log μ₀| dμ₀`; `None` when `m·d > 2`.
    pub log_density_moment: Option<f64>,
    /// `∫ |∇ log μ₀|⁴ dμ₀`.
    pub score_fourth_moment: Option<f64>,
    /// `∫ |Δμ₀ / μ₀|² dμ₀`.
    pub laplacian_ratio_moment: Option<f64>,
    pub sup_density: f64,
    pub bounded: bool,
    pub positive: bool,
}

impl AssumptionRReport {
    pub fn r1_finite(&self) -> bool {
        self.r1.iter().all(|e| e.finite)
    }
}

const R1_INTERVALS: usize = 400;
const R1_SAMPLES: usize = 200_000;
const R1_SEED: u64 = 0x5231;

/// `D₄(μ₀ ⋆_i δ_a ‖ μ₀) = exp(6 aᵀ (Σ⁻¹)_{ii} a)` for a shift `a` of block
/// `block` of a Gaussian law.
pub fn gaussian_shift_d4(law: &GaussianLaw, d: usize, block: usize, a: &[f64]) -> f64 {
    let mut shift = vec![0.0; law.dim()];
    shift[block * d..(block + 1) * d].copy_from_slice(a);
    math::exp(6.0 * law.precision_form(&shift))
}

/// Upper bound `exp(4 √h ‖∇ log μ₀‖_∞ |z|)` on `D₄(μ₀ ⋆ δ_{z√h} ‖ μ₀)` for a
/// law with bounded score. Requires `score_bound ≥ 0` and `h > 0`.
pub fn subexponential_d4_bound(score_bound: f64, h: f64, z: f64) -> f64 {
    debug_assert!(score_bound >= 0.0 && h > 0.0);
    math::exp(4.0 * sqrt(h) * score_bound * fabs(z))
}

pub fn check_assumption_r_law(
    law: &InitialLaw,
    m: usize,
    d: usize,
    h: f64,
    kernel: &KernelSpec,
) -> Result<AssumptionRReport> {
    check_assumption_r(law.as_gaussian()?, m, d, h, kernel)
}

pub fn check_assumption_r(
    law: &GaussianLaw,
    m: usize,
    d: usize,
    h: f64,
    kernel: &KernelSpec,
) -> Result<AssumptionRReport> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(invalid("h", "bandwidth must be positive and finite"));
    }
    if law.dim() != m * d {
        return Err(Error::ShapeMismatch(alloc::format!(
            "law has dimension {}, expected {}",
            law.dim(),
            m * d
        )));
    }
    if kernel.dim() != d {
        return Err(Error::ShapeMismatch(alloc::format!(
            "kernel dimension {} != block dimension {d}",
            kernel.dim()
        )));
    }
    let precision = law.precision();
    let k = m * d;
    let r1 = (0..m)
        .map(|i| {
            let mut block = vec![0.0; d * d];
            for r in 0..d {
                for c in 0..d {
                    block[r * d + c] = precision[(i * d + r) * k + i * d + c];
                }
            }
            if kernel.name() == KernelId::Gaussian.as_str() {
                r1_gaussian_kernel(i, &block, d, h)
            } else {
                r1_monte_carlo(i, &block, d, h, kernel)
            }
        })
        .collect::<Result<Vec<_>>>()?;

    let (log_density_moment, score_fourth_moment, laplacian_ratio_moment) = if k <= 2 {
        let (a, b, c) = regularity_moments(law, &precision);
        (Some(a), Some(b), Some(c))
    } else {
        (None, None, None)
    };
    let sup_density = law.sup_density();
    Ok(AssumptionRReport {
        h,
        r1,
        moments_finite: true,
        log_density_moment,
        score_fourth_moment,
        laplacian_ratio_moment,
        sup_density,
        bounded: sup_density.is_finite(),
        positive: true,
    })
}

/// With `w = s u z₁ + z₂ ~ N(0, v I)`, `v = 1 + s²u²`,
/// `E exp(6h wᵀAw) = det(I - 12 h v A)^{-1/2}`, infinite unless the matrix is
/// positive definite. `v` peaks at `s = u = 1`, so finiteness is decided
/// there.
fn r1_gaussian_kernel(block: usize, a: &[f64], d: usize, h: f64) -> Result<R1Estimate> {
    let inner = |v: f64| -> f64 {
        let mut mat = vec![0.0; d * d];
        for r in 0..d {
            for c in 0..d {
                mat[r * d + c] = if r == c { 1.0 } else { 0.0 } - 12.0 * h * v * a[r * d + c];
            }
        }
        match math::cholesky(&mat, d) {
            Some(l) => {
                let log_det: f64 = (0..d).map(|r| 2.0 * log(l[r * d + r])).sum();
                math::exp(-0.5 * log_det)
            }
            None => f64::INFINITY,
        }
    };
    let finite = inner(2.0).is_finite();
    let value = if finite {
        let (nodes, weights) = math::simpson_nodes(0.0, 1.0, R1_INTERVALS);
        let mut acc = CompensatedSum::new();
        for (s, ws) in nodes.iter().zip(&weights) {
            for (u, wu) in nodes.iter().zip(&weights) {
                acc.add(ws * wu * inner(1.0 + s * s * u * u));
            }
        }
        acc.value()
    } else {
        f64::INFINITY
    };
    Ok(R1Estimate {
        block,
        value,
        std_error: 0.0,
        finite,
        method: R1Method::Quadrature,
    })
}

fn r1_monte_carlo(
    block: usize,
    a: &[f64],
    d: usize,
    h: f64,
    kernel: &KernelSpec,
) -> Result<R1Estimate> {
    let mut rng = CounterRng::new(R1_SEED, Domain::Auxiliary, block as u64, 0);
    let mut z1 = vec![0.0; d];
    let mut z2 = vec![0.0; d];
    let mut w = vec![0.0; d];
    let mut sum = CompensatedSum::new();
    let mut sum_sq = CompensatedSum::new();
    for _ in 0..R1_SAMPLES {
        let su = rng.uniform() * rng.uniform();
        kernel.sample(&mut rng, &mut z1)?;
        kernel.sample(&mut rng, &mut z2)?;
        for c in 0..d {
            w[c] = su * z1[c] + z2[c];
        }
        let mut q = 0.0;
        for r in 0..d {
            for c in 0..d {
                q += w[r] * a[r * d + c] * w[c];
            }
        }
        let value = math::exp(6.0 * h * q);
        sum.add(value);
        sum_sq.add(value * value);
    }
    let n = R1_SAMPLES as f64;
    let mean = sum.value() / n;
    let var = (sum_sq.value() / n - mean * mean).max(0.0) * n / (n - 1.0);
    Ok(R1Estimate {
        block,
        value: mean,
        std_error: sqrt(var / n),
        finite: mean.is_finite(),
        method: R1Method::MonteCarlo {
            samples: R1_SAMPLES,
        },
    })
}

/// Tensor Simpson over whitened coordinates `x = μ + L u`, `u ∈ [-10, 10]^k`.
fn regularity_moments(law: &GaussianLaw, precision: &[f64]) -> (f64, f64, f64) {
    let k = law.dim();
    let trace: f64 = (0..k).map(|r| precision[r * k + r]).sum();
    let log_norm = -0.5 * law.log_det() - 0.5 * k as f64 * log(2.0 * core::f64::consts::PI);
    let intervals = if k == 1 { 2000 } else { 400 };
    let (nodes, weights) = math::simpson_nodes(-10.0, 10.0, intervals);
    let mut acc = [
        CompensatedSum::new(),
        CompensatedSum::new(),
        CompensatedSum::new(),
    ];
    let mut visit = |u: &[f64], weight: f64| {
        let u2: f64 = u.iter().map(|c| c * c).sum();
        let phi = math::exp(-0.5 * u2) * math::pow(2.0 * core::f64::consts::PI, -0.5 * k as f64);
        // ∇ log p(x) = -Σ⁻¹(x - μ) = -L⁻ᵀ u
        let score = math::backward_solve(law.cholesky(), k, u);
        let s2: f64 = score.iter().map(|c| c * c).sum();
        let w = weight * phi;
        acc[0].add(w * fabs(log_norm - 0.5 * u2));
        acc[1].add(w * s2 * s2);
        acc[2].add(w * (s2 - trace) * (s2 - trace));
    };
    if k == 1 {
        for (u, w) in nodes.iter().zip(&weights) {
            visit(&[*u], *w);
        }
    } else {
        for (u0, w0) in nodes.iter().zip(&weights) {
            for (u1, w1) in nodes.iter().zip(&weights) {
                visit(&[*u0, *u1], w0 * w1);
            }
        }
    }
    (acc[0].value(), acc[1].value(), acc[2].value())
}

#[cfg(test)]
#[path = "../../tests/unit/assumptions.rs"]
mod tests;
