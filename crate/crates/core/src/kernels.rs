//! Mollification kernels and their bandwidth-scaled family.
//!
//! The bandwidth `h` is a **variance** scale, `K_h(z) = h^{-d/2} K(z/√h)`,
//! so a Gaussian `K_h` has standard deviation `√h`. Statistics libraries
//! usually parameterize by the standard deviation instead; convert before
//! comparing.

use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{invalid, Error, Result};
use crate::math::{self, fabs, pow, sqrt, CompensatedSum};
use crate::rng::{CounterRng, Domain};

/// Shipped kernels. All are radial and satisfy the kernel regularity
/// requirements (symmetric, centred, bounded, `∫ K e^{|z|²/4} < ∞`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelId {
    Gaussian,
    Epanechnikov,
    UniformBall,
}

impl KernelId {
    pub const ALL: [KernelId; 3] = [
        KernelId::Gaussian,
        KernelId::Epanechnikov,
        KernelId::UniformBall,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            KernelId::Gaussian => "gaussian",
            KernelId::Epanechnikov => "epanechnikov",
            KernelId::UniformBall => "uniform-ball",
        }
    }
}

impl fmt::Display for KernelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for KernelId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        KernelId::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::UnknownKernel(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Profile {
    Gaussian,
    Epanechnikov,
    Uniform,
}

impl Profile {
    /// Unnormalized radial profile as a function of `|z|²`.
    #[inline(always)]
    pub(crate) fn eval(self, r2: f64) -> f64 {
        match self {
            Profile::Gaussian => math::exp_nonpositive(-0.5 * r2),
            Profile::Epanechnikov => {
                let v = 1.0 - r2;
                if v > 0.0 {
                    v
                } else {
                    0.0
                }
            }
            Profile::Uniform => {
                if r2 <= 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

pub type DensityFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Shape {
    Radial { profile: Profile, norm: f64 },
    Custom(DensityFn),
}

/// A probability density `K` on `R^d` used for mollification.
#[derive(Clone)]
pub struct KernelSpec {
    name: String,
    dim: usize,
    shape: Shape,
    support_radius: f64,
    sup_value: f64,
}

impl fmt::Debug for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KernelSpec")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("support_radius", &self.support_radius)
            .field("sup_value", &self.sup_value)
            .finish()
    }
}

impl KernelSpec {
    pub fn new(id: KernelId, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("dim", "kernel dimension must be positive"));
        }
        let d = dim as f64;
        let (profile, norm, support_radius) = match id {
            KernelId::Gaussian => (
                Profile::Gaussian,
                pow(2.0 * core::f64::consts::PI, -0.5 * d),
                f64::INFINITY,
            ),
            KernelId::Epanechnikov => (
                Profile::Epanechnikov,
                (d + 2.0) / (2.0 * math::unit_ball_volume(dim)),
                1.0,
            ),
            KernelId::UniformBall => (Profile::Uniform, 1.0 / math::unit_ball_volume(dim), 1.0),
        };
        Ok(Self {
            name: id.as_str().to_string(),
            dim,
            shape: Shape::Radial { profile, norm },
            support_radius,
            sup_value: norm,
        })
    }

    /// A user-supplied density. It is not assumed to satisfy anything; run
    /// [`check_assumption_k`] on it.
    pub fn custom(
        name: impl Into<String>,
        dim: usize,
        density: DensityFn,
        support_radius: f64,
        sup_value: f64,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("dim", "kernel dimension must be positive"));
        }
        if !(support_radius > 0.0) {
            return Err(invalid("support_radius", "must be positive (or infinite)"));
        }
        Ok(Self {
            name: name.into(),
            dim,
            shape: Shape::Custom(density),
            support_radius,
            sup_value,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Radius `R` with `K(z) = 0` for `|z| > R`; infinite for full support.
    pub fn support_radius(&self) -> f64 {
        self.support_radius
    }

    pub fn sup_value(&self) -> f64 {
        self.sup_value
    }

    pub fn is_compact(&self) -> bool {
        self.support_radius.is_finite()
    }

    pub(crate) fn radial(&self) -> Option<(Profile, f64)> {
        match self.shape {
            Shape::Radial { profile, norm } => Some((profile, norm)),
            Shape::Custom(_) => None,
        }
    }

    /// `K(z)`.
    pub fn density(&self, z: &[f64]) -> f64 {
        debug_assert_eq!(z.len(), self.dim);
        match &self.shape {
            Shape::Radial { profile, norm } => {
                let r2: f64 = z.iter().map(|v| v * v).sum();
                norm * profile.eval(r2)
            }
            Shape::Custom(f) => f(z),
        }
    }

    /// `K(z * scale)` without materializing the scaled point.
    fn density_scaled(&self, z: &[f64], scale: f64) -> f64 {
        match &self.shape {
            Shape::Radial { profile, norm } => {
                let r2: f64 = z.iter().map(|v| (v * scale) * (v * scale)).sum();
                norm * profile.eval(r2)
            }
            Shape::Custom(f) => {
                let scaled: Vec<f64> = z.iter().map(|v| v * scale).collect();
                f(&scaled)
            }
        }
    }

    /// Draws `z ~ K` into `out`. Only shipped (radial) kernels can be sampled.
    pub fn sample(&self, rng: &mut CounterRng, out: &mut [f64]) -> Result<()> {
        let Some((profile, _)) = self.radial() else {
            return Err(invalid("kernel", "custom kernels cannot be sampled"));
        };
        match profile {
            Profile::Gaussian => out.iter_mut().for_each(|v| *v = rng.normal()),
            Profile::Uniform => sample_ball(rng, out),
            Profile::Epanechnikov => {
                // Rejection from the uniform ball with acceptance 1 - |z|².
                loop {
                    sample_ball(rng, out);
                    let r2: f64 = out.iter().map(|v| v * v).sum();
                    if rng.uniform() < 1.0 - r2 {
                        break;
                    }
                }
            }
        }
        Ok(())
    }
}

fn sample_ball(rng: &mut CounterRng, out: &mut [f64]) {
    loop {
        for v in out.iter_mut() {
            *v = rng.uniform_in(-1.0, 1.0);
        }
        if out.iter().map(|v| v * v).sum::<f64>() <= 1.0 {
            return;
        }
    }
}

/// `K_h` for a fixed bandwidth.
#[derive(Debug, Clone)]
pub struct ScaledKernel {
    base: KernelSpec,
    h: f64,
    inv_sqrt_h: f64,
    h_pow: f64,
}

impl ScaledKernel {
    pub fn new(base: KernelSpec, h: f64) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(invalid("h", "bandwidth must be positive and finite"));
        }
        let d = base.dim as f64;
        Ok(Self {
            inv_sqrt_h: 1.0 / sqrt(h),
            h_pow: pow(h, -0.5 * d),
            base,
            h,
        })
    }

    pub fn base(&self) -> &KernelSpec {
        &self.base
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// `h^{-d/2}`.
    pub fn amplitude(&self) -> f64 {
        self.h_pow
    }

    /// `1/√h`.
    pub fn inv_sqrt_h(&self) -> f64 {
        self.inv_sqrt_h
    }

    /// Radius beyond which `K_h` vanishes (`R √h`).
    pub fn scaled_support(&self) -> f64 {
        self.base.support_radius * sqrt(self.h)
    }

    /// `K_h(z) = h^{-d/2} K(z/√h)`.
    pub fn eval(&self, z: &[f64]) -> f64 {
        self.h_pow * self.base.density_scaled(z, self.inv_sqrt_h)
    }

    /// `K_h(0)`, the largest value for every shipped kernel.
    pub fn peak(&self) -> f64 {
        let zero = vec![0.0; self.base.dim];
        self.eval(&zero)
    }
}

/// `h^{-d/2} K(z/√h)` for a bare kernel; see [`ScaledKernel::eval`].
pub fn eval_scaled(kernel: &KernelSpec, h: f64, z: &[f64]) -> Result<f64> {
    Ok(ScaledKernel::new(kernel.clone(), h)?.eval(z))
}

/// Quadrature value with a pass/fail flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Checked {
    pub value: f64,
    pub pass: bool,
}

/// Numerical verification of the kernel requirements.
#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionKReport {
    /// `∫ K`, passes within 1e-6 of one.
    pub mass: Checked,
    /// Componentwise `∫ K(z) z dz`.
    pub mean: Vec<f64>,
    /// Largest absolute mean component, passes below 1e-6.
    pub mean_check: Checked,
    /// `∫ K(z) e^{|z|²/4} dz`; passes when finite (no threshold).
    pub exp_moment: Checked,
    /// Largest `|K(z) - K(-z)|` over sampled points, passes below 1e-6.
    pub symmetric: Checked,
    /// Largest sampled value of `K`, passes when finite.
    pub sup: Checked,
}

impl AssumptionKReport {
    pub fn all_pass(&self) -> bool {
        self.mass.pass
            && self.mean_check.pass
            && self.exp_moment.pass
            && self.symmetric.pass
            && self.sup.pass
    }
}

pub const ASSUMPTION_K_TOLERANCE: f64 = 1e-6;
const MAX_QUADRATURE_DIM: usize = 2;

struct Moments {
    mass: f64,
    mean: Vec<f64>,
    second: f64,
    exp_moment: f64,
    sup: f64,
}

fn quadrature_box(kernel: &KernelSpec) -> f64 {
    // Compact kernels integrate exactly over their support so the grid
    // endpoints sit on the (possible) discontinuity.
    if kernel.is_compact() {
        kernel.support_radius
    } else {
        12.0
    }
}

fn moments(kernel: &KernelSpec) -> Result<Moments> {
    let d = kernel.dim;
    if d > MAX_QUADRATURE_DIM {
        return Err(Error::UnsupportedDimension {
            dim: d,
            max: MAX_QUADRATURE_DIM,
        });
    }
    let half = quadrature_box(kernel);
    let intervals = if d == 1 { 20_000 } else { 10_000 };
    let (nodes, weights) = math::simpson_nodes(-half, half, intervals);
    let mut mass = CompensatedSum::new();
    let mut mean = vec![CompensatedSum::new(); d];
    let mut second = CompensatedSum::new();
    let mut expm = CompensatedSum::new();
    let mut sup: f64 = 0.0;
    let mut z = vec![0.0; d];
    let mut visit = |z: &[f64], w: f64| {
        let k = kernel.density(z);
        let r2: f64 = z.iter().map(|v| v * v).sum();
        let kw = k * w;
        mass.add(kw);
        for (acc, zc) in mean.iter_mut().zip(z) {
            acc.add(kw * zc);
        }
        second.add(kw * r2);
        expm.add(kw * math::exp(0.25 * r2));
        sup = sup.max(k);
    };
    if d == 1 {
        for (x, w) in nodes.iter().zip(&weights) {
            z[0] = *x;
            visit(&z, *w);
        }
    } else {
        for (x, wx) in nodes.iter().zip(&weights) {
            z[0] = *x;
            for (y, wy) in nodes.iter().zip(&weights) {
                z[1] = *y;
                visit(&z, wx * wy);
            }
        }
    }
    Ok(Moments {
        mass: mass.value(),
        mean: mean.iter().map(|m| m.value()).collect(),
        second: second.value(),
        exp_moment: expm.value(),
        sup,
    })
}

fn max_asymmetry(kernel: &KernelSpec) -> f64 {
    let half = quadrature_box(kernel);
    let mut rng = CounterRng::new(0x5EED_0F_C0DE, Domain::Auxiliary, 0, 0);
    let mut z = vec![0.0; kernel.dim];
    let mut neg = vec![0.0; kernel.dim];
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        for (a, b) in z.iter_mut().zip(neg.iter_mut()) {
            *a = rng.uniform_in(-half, half);
            *b = -*a;
        }
        worst = worst.max(fabs(kernel.density(&z) - kernel.density(&neg)));
    }
    worst
}

/// Checks mass, centring, the `e^{|z|²/4}` moment, symmetry and
/// boundedness of `kernel` by quadrature (`d ≤ 2`).
pub fn check_assumption_k(kernel: &KernelSpec) -> Result<AssumptionKReport> {
    let m = moments(kernel)?;
    let tol = ASSUMPTION_K_TOLERANCE;
    let worst_mean = m.mean.iter().fold(0.0f64, |acc, v| acc.max(fabs(*v)));
    let asym = max_asymmetry(kernel);
    Ok(AssumptionKReport {
        mass: Checked {
            value: m.mass,
            pass: fabs(m.mass - 1.0) <= tol,
        },
        mean_check: Checked {
            value: worst_mean,
            pass: worst_mean <= tol,
        },
        mean: m.mean,
        exp_moment: Checked {
            value: m.exp_moment,
            pass: m.exp_moment.is_finite(),
        },
        symmetric: Checked {
            value: asym,
            pass: asym <= tol,
        },
        sup: Checked {
            value: m.sup,
            pass: m.sup.is_finite(),
        },
    })
}

/// `∫ K(z) |z|² dz` by quadrature (`d ≤ 2`).
pub fn second_moment(kernel: &KernelSpec) -> Result<f64> {
    Ok(moments(kernel)?.second)
}

#[cfg(test)]
#[path = "../tests/unit/kernels.rs"]
mod tests;
