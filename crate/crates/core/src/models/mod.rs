//! Block-structured coefficients `(b, V, σ, μ₀)`, presets, oracles and
//! initial-law checks.

mod assumptions;
mod law;
mod presets;

use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

pub use assumptions::{
    check_assumption_r, check_assumption_r_law, gaussian_shift_d4, subexponential_d4_bound,
    AssumptionRReport, R1Estimate, R1Method,
};
pub use law::{GaussianLaw, InitialLaw, SamplerFn};
pub use presets::{preset, preset_with, Preset, PresetOptions, DEFAULT_SATURATION};

use crate::error::{invalid, Error, Result};
use crate::math::sqrt;
use crate::rng::CounterRng;

/// Which part of the state `b^i_j` reads. Drives the shortcuts in the drift
/// loop, so an implementation must never claim less dependence than it has.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dependence {
    /// `b^i_j ≡ 0`.
    Zero,
    /// Reads block `j` only.
    QueryOnly,
    /// Reads the blocks other than `j` only.
    AtomOnly,
    /// Anything else.
    Mixed,
}

/// Coefficient families `b^i_j, V^i : R^{m·d} → R^d`. Implementations must be
/// pure.
pub trait Coefficients: Send + Sync {
    fn blocks(&self) -> usize;
    fn block_dim(&self) -> usize;
    /// Writes `b^i_j(x)` into `out` (length `d`).
    fn b(&self, i: usize, j: usize, x: &[f64], out: &mut [f64]);
    /// Writes `V^i(x)` into `out` (length `d`).
    fn v(&self, i: usize, x: &[f64], out: &mut [f64]);
    fn dependence(&self, _i: usize, _j: usize) -> Dependence {
        Dependence::Mixed
    }
}

/// Exact limit drift `(x, t) ↦ Σ_j E[b^i_j(X_t) | X_t^j = x^j] + V^i(x)`.
pub type OracleFn = Arc<dyn Fn(&[f64], f64, &mut [f64]) -> Result<()> + Send + Sync>;

/// Declared sup-norm bounds of the coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub b: f64,
    pub v: f64,
    /// Saturation level used by the preset, if any.
    pub saturation: Option<f64>,
}

#[derive(Clone)]
pub struct ModelSpec {
    name: String,
    m: usize,
    d: usize,
    coefficients: Arc<dyn Coefficients>,
    sigma: f64,
    mu0: InitialLaw,
    bounds: Bounds,
    oracle: Option<OracleFn>,
}

impl fmt::Debug for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ModelSpec")
            .field("name", &self.name)
            .field("m", &self.m)
            .field("d", &self.d)
            .field("sigma", &self.sigma)
            .field("mu0", &self.mu0)
            .field("bounds", &self.bounds)
            .field("oracle", &self.oracle.is_some())
            .finish()
    }
}

impl ModelSpec {
    pub fn new(
        name: impl Into<String>,
        coefficients: Arc<dyn Coefficients>,
        sigma: f64,
        mu0: InitialLaw,
        bounds: Bounds,
    ) -> Result<Self> {
        let m = coefficients.blocks();
        let d = coefficients.block_dim();
        if m == 0 || d == 0 {
            return Err(invalid(
                "coefficients",
                "block count and dimension must be positive",
            ));
        }
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(invalid("sigma", "must be finite and non-negative"));
        }
        if let Some(dim) = mu0.dim() {
            if dim != m * d {
                return Err(Error::ShapeMismatch(alloc::format!(
                    "initial law has dimension {dim}, model state has {}",
                    m * d
                )));
            }
        }
        Ok(Self {
            name: name.into(),
            m,
            d,
            coefficients,
            sigma,
            mu0,
            bounds,
            oracle: None,
        })
    }

    pub fn with_oracle(mut self, oracle: OracleFn) -> Self {
        self.oracle = Some(oracle);
        self
    }

    pub fn with_initial_law(mut self, mu0: InitialLaw) -> Result<Self> {
        if let Some(dim) = mu0.dim() {
            if dim != self.m * self.d {
                return Err(Error::ShapeMismatch("initial law dimension".to_string()));
            }
        }
        self.mu0 = mu0;
        Ok(self)
    }

    pub fn with_sigma(mut self, sigma: f64) -> Result<Self> {
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(invalid("sigma", "must be finite and non-negative"));
        }
        self.sigma = sigma;
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn state_dim(&self) -> usize {
        self.m * self.d
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn mu0(&self) -> &InitialLaw {
        &self.mu0
    }

    pub fn bounds(&self) -> Bounds {
        self.bounds
    }

    pub fn coefficients(&self) -> &dyn Coefficients {
        &*self.coefficients
    }

    pub fn b(&self, i: usize, j: usize, x: &[f64], out: &mut [f64]) {
        self.coefficients.b(i, j, x, out)
    }

    pub fn v(&self, i: usize, x: &[f64], out: &mut [f64]) {
        self.coefficients.v(i, x, out)
    }

    pub fn dependence(&self, i: usize, j: usize) -> Dependence {
        self.coefficients.dependence(i, j)
    }

    /// True when every `b^i_j` is identically zero, so the particle drift is
    /// just `V`.
    pub fn is_interaction_free(&self) -> bool {
        (0..self.m).all(|i| (0..self.m).all(|j| self.dependence(i, j) == Dependence::Zero))
    }

    pub fn has_oracle(&self) -> bool {
        self.oracle.is_some() || self.is_interaction_free()
    }

    /// Writes the exact limit drift at `(x, t)` into `out`.
    pub fn oracle_drift_into(&self, x: &[f64], t: f64, out: &mut [f64]) -> Result<()> {
        if let Some(oracle) = &self.oracle {
            return oracle(x, t, out);
        }
        if self.is_interaction_free() {
            for i in 0..self.m {
                self.v(i, x, &mut out[i * self.d..(i + 1) * self.d]);
            }
            return Ok(());
        }
        Err(Error::NoOracle(self.name.clone()))
    }

    /// Draws one point from `μ₀` for particle `k`.
    pub fn sample_initial(&self, seed: u64, k: u64, out: &mut [f64]) {
        self.mu0.sample(seed, k, out)
    }
}

/// Exact limit drift per block.
pub fn oracle_drift(model: &ModelSpec, x: &[f64], t: f64) -> Result<Vec<f64>> {
    if x.len() != model.state_dim() {
        return Err(Error::ShapeMismatch(alloc::format!(
            "state has {} coordinates, model expects {}",
            x.len(),
            model.state_dim()
        )));
    }
    let mut out = vec![0.0; model.state_dim()];
    model.oracle_drift_into(x, t, &mut out)?;
    Ok(out)
}

/// Largest observed coefficient norms over random probe points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundsReport {
    pub max_b: f64,
    pub max_v: f64,
    pub samples: usize,
}

impl BoundsReport {
    pub fn within(&self, bounds: &Bounds) -> bool {
        self.max_b <= bounds.b && self.max_v <= bounds.v
    }
}

/// Evaluates every `b^i_j` and `V^i` at `samples` points: half drawn wide
/// around the origin (standard deviation 5), half uniform on `[-50, 50]^{m·d}`.
pub fn probe_bounds(model: &ModelSpec, samples: usize, seed: u64) -> BoundsReport {
    let (m, d) = (model.m, model.d);
    let mut x = vec![0.0; m * d];
    let mut out = vec![0.0; d];
    let mut max_b: f64 = 0.0;
    let mut max_v: f64 = 0.0;
    let mut rng = CounterRng::new(seed, crate::rng::Domain::Auxiliary, 0, 0);
    let norm = |v: &[f64]| sqrt(v.iter().map(|a| a * a).sum());
    for s in 0..samples {
        for c in x.iter_mut() {
            *c = if s % 2 == 0 {
                5.0 * rng.normal()
            } else {
                rng.uniform_in(-50.0, 50.0)
            };
        }
        for i in 0..m {
            for j in 0..m {
                model.b(i, j, &x, &mut out);
                max_b = max_b.max(norm(&out));
            }
            model.v(i, &x, &mut out);
            max_v = max_v.max(norm(&out));
        }
    }
    BoundsReport {
        max_b,
        max_v,
        samples,
    }
}
