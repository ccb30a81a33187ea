use crate::error::{invalid, Error, Result};
use crate::kernels::{KernelSpec, ScaledKernel};
use crate::math::{self, entropy_gap, fabs, sqrt, CompensatedSum};

/// A closed-form density on the line with a location/scale hint for the
/// quadrature domain.
#[derive(Clone, Copy)]
pub struct Density1d<'a> {
    pdf: &'a dyn Fn(f64) -> f64,
    center: f64,
    scale: f64,
}

impl<'a> Density1d<'a> {
    pub fn new(pdf: &'a dyn Fn(f64) -> f64) -> Self {
        Self { pdf, center: 0.0, scale: 1.0 }
    }

    pub fn with_location(mut self, center: f64, scale: f64) -> Self {
        self.center = center;
        self.scale = scale;
        self
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.pdf)(x)
    }
}

const OUTER_STEP: f64 = 0.01;
const INITIAL_HALF_WIDTH: f64 = 8.0;
const MAX_HALF_WIDTH: f64 = 1.0e4;
const TAIL_TOLERANCE: f64 = 1e-10;

/// `H(p ‖ p ⋆ K_h) = ∫ p log(p / (p ⋆ K_h))` by nested quadrature.
///
/// The outer integrand is written as `q·((1+u)ln(1+u) - u)` with
/// `u = (p - q)/q`, which is non-negative and free of the cancellation in
/// `p log(p/q)` when `q ≈ p`. The domain `center ± L·scale` starts at
/// `L = 8` and widens until the mass outside it is below `1e-10`.
pub fn mollification_entropy(density: Density1d<'_>, kernel: &KernelSpec, h: f64) -> Result<f64> {
    if kernel.dim() != 1 {
        return Err(Error::UnsupportedDimension { dim: kernel.dim(), max: 1 });
    }
    if !(density.scale > 0.0 && density.scale.is_finite() && density.center.is_finite()) {
        return Err(invalid("density", "location hint must be finite with positive scale"));
    }
    let scaled = ScaledKernel::new(kernel.clone(), h)?;
    let mut half = INITIAL_HALF_WIDTH;
    let (lo, hi) = loop {
        let lo = density.center - half * density.scale;
        let hi = density.center + half * density.scale;
        let intervals = ((hi - lo) / (OUTER_STEP * density.scale)) as usize;
        let tail = fabs(1.0 - math::simpson(|x| density.eval(x), lo, hi, intervals));
        if tail < TAIL_TOLERANCE {
            break (lo, hi);
        }
        if half * 1.5 > MAX_HALF_WIDTH {
            return Err(Error::DomainTruncated { tail_mass: tail, tolerance: TAIL_TOLERANCE });
        }
        half *= 1.5;
    };

    let (inner_nodes, inner_weights) = inner_rule(&scaled);
    let convolved = |x: f64| {
        let mut acc = CompensatedSum::new();
        for (y, w) in inner_nodes.iter().zip(&inner_weights) {
            acc.add(w * density.eval(x - y));
        }
        acc.value()
    };
    let intervals = ((hi - lo) / (OUTER_STEP * density.scale)) as usize;
    let (nodes, weights) = math::simpson_nodes(lo, hi, intervals);
    let mut acc = CompensatedSum::new();
    for (x, w) in nodes.iter().zip(&weights) {
        let p = density.eval(*x);
        let q = convolved(*x);
        if q <= 0.0 {
            if p > 0.0 {
                return Ok(f64::INFINITY);
            }
            continue;
        }
        acc.add(w * q * entropy_gap((p - q) / q));
    }
    Ok(acc.value().max(0.0))
}

/// Nodes `y` and weights `K_h(y)·Δy` for `∫ f(y) K_h(y) dy`.
fn inner_rule(scaled: &ScaledKernel) -> (alloc::vec::Vec<f64>, alloc::vec::Vec<f64>) {
    let root = sqrt(scaled.h());
    if scaled.base().is_compact() {
        // Simpson on the support; the kernel's kinks sit on the endpoints.
        let r = scaled.base().support_radius() * root;
        let (nodes, w) = math::simpson_nodes(-r, r, 400);
        let weights = nodes.iter().zip(&w).map(|(y, w)| w * scaled.eval(&[*y])).collect();
        (nodes, weights)
    } else {
        // Trapezoid: spectrally accurate for smooth, rapidly decaying weights.
        let step = root / 16.0;
        let count = 12 * 16;
        let nodes: alloc::vec::Vec<f64> = (-count..=count).map(|i| i as f64 * step).collect();
        let weights = nodes.iter().map(|y| step * scaled.eval(&[*y])).collect();
        (nodes, weights)
    }
}
