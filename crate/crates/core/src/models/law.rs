use alloc::string::ToString;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{invalid, Error, Result};
use crate::math::{self, fabs, log, pow};
use crate::rng::{CounterRng, Domain, NoiseKey, StreamAddress};

/// Multivariate normal law with a cached Cholesky factor.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianLaw {
    mean: Vec<f64>,
    covariance: Vec<f64>,
    chol: Vec<f64>,
}

impl GaussianLaw {
    /// `covariance` is row-major `dim × dim`.
    pub fn new(mean: Vec<f64>, covariance: Vec<f64>) -> Result<Self> {
        let dim = mean.len();
        if dim == 0 {
            return Err(invalid("mean", "dimension must be positive"));
        }
        if covariance.len() != dim * dim {
            return Err(Error::ShapeMismatch(alloc::format!(
                "covariance has {} entries, expected {}",
                covariance.len(),
                dim * dim
            )));
        }
        for i in 0..dim {
            for j in 0..i {
                if fabs(covariance[i * dim + j] - covariance[j * dim + i]) > 1e-12 {
                    return Err(Error::NotPositiveDefinite);
                }
            }
        }
        let chol = math::cholesky(&covariance, dim).ok_or(Error::NotPositiveDefinite)?;
        Ok(Self {
            mean,
            covariance,
            chol,
        })
    }

    /// `N(0, I_dim)`.
    pub fn standard(dim: usize) -> Self {
        let mut cov = vec![0.0; dim * dim];
        for i in 0..dim {
            cov[i * dim + i] = 1.0;
        }
        Self::new(vec![0.0; dim], cov).expect("identity is positive definite")
    }

    /// Independent coordinates with the given means and variances.
    pub fn diagonal(mean: Vec<f64>, variances: &[f64]) -> Result<Self> {
        let dim = mean.len();
        if variances.len() != dim {
            return Err(Error::ShapeMismatch("variances length".to_string()));
        }
        let mut cov = vec![0.0; dim * dim];
        for i in 0..dim {
            cov[i * dim + i] = variances[i];
        }
        Self::new(mean, cov)
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn covariance(&self) -> &[f64] {
        &self.covariance
    }

    /// Lower Cholesky factor `L` with `L Lᵀ = Σ`.
    pub fn cholesky(&self) -> &[f64] {
        &self.chol
    }

    pub fn log_det(&self) -> f64 {
        let dim = self.dim();
        (0..dim).map(|i| 2.0 * log(self.chol[i * dim + i])).sum()
    }

    /// `L⁻¹ (x - μ)`.
    pub fn whiten(&self, x: &[f64]) -> Vec<f64> {
        let centred: Vec<f64> = x.iter().zip(&self.mean).map(|(a, b)| a - b).collect();
        math::forward_solve(&self.chol, self.dim(), &centred)
    }

    /// `vᵀ Σ⁻¹ v`.
    pub fn precision_form(&self, v: &[f64]) -> f64 {
        let y = math::forward_solve(&self.chol, self.dim(), v);
        y.iter().map(|a| a * a).sum()
    }

    /// `Σ⁻¹` as a dense row-major matrix.
    pub fn precision(&self) -> Vec<f64> {
        let dim = self.dim();
        let mut out = vec![0.0; dim * dim];
        let mut e = vec![0.0; dim];
        for c in 0..dim {
            e.iter_mut().for_each(|v| *v = 0.0);
            e[c] = 1.0;
            let y = math::forward_solve(&self.chol, dim, &e);
            let col = math::backward_solve(&self.chol, dim, &y);
            for r in 0..dim {
                out[r * dim + c] = col[r];
            }
        }
        out
    }

    pub fn log_density(&self, x: &[f64]) -> f64 {
        let u = self.whiten(x);
        let q: f64 = u.iter().map(|a| a * a).sum();
        -0.5 * q - 0.5 * self.log_det() - 0.5 * self.dim() as f64 * log(2.0 * core::f64::consts::PI)
    }

    pub fn density(&self, x: &[f64]) -> f64 {
        math::exp(self.log_density(x))
    }

    /// `sup p = (2π)^{-k/2} det(Σ)^{-1/2}`.
    pub fn sup_density(&self) -> f64 {
        pow(2.0 * core::f64::consts::PI, -0.5 * self.dim() as f64)
            * math::exp(-0.5 * self.log_det())
    }

    /// Writes `μ + L z` into `out`.
    pub fn transform(&self, z: &[f64], out: &mut [f64]) {
        let dim = self.dim();
        for r in 0..dim {
            let mut s = self.mean[r];
            for c in 0..=r {
                s += self.chol[r * dim + c] * z[c];
            }
            out[r] = s;
        }
    }
}

pub type SamplerFn = Arc<dyn Fn(&mut CounterRng, &mut [f64]) + Send + Sync>;

/// Initial law `μ₀` of a single particle (a point in `R^{m·d}`).
#[derive(Clone)]
pub enum InitialLaw {
    Gaussian(GaussianLaw),
    /// All particles start at the same point.
    Dirac(Vec<f64>),
    /// Sampler-only law; assumption checks are unavailable.
    Sampler(SamplerFn),
}

impl fmt::Debug for InitialLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialLaw::Gaussian(g) => f.debug_tuple("Gaussian").field(g).finish(),
            InitialLaw::Dirac(x) => f.debug_tuple("Dirac").field(x).finish(),
            InitialLaw::Sampler(_) => f.write_str("Sampler(..)"),
        }
    }
}

impl InitialLaw {
    /// Draw for particle `k`. Depends only on `(seed, k)`.
    pub fn sample(&self, seed: u64, k: u64, out: &mut [f64]) {
        match self {
            InitialLaw::Gaussian(g) => {
                let key = NoiseKey::new(seed);
                let z: Vec<f64> = (0..out.len())
                    .map(|slot| {
                        key.normal(StreamAddress {
                            domain: Domain::Init,
                            particle: k,
                            slot: slot as u32,
                            step: 0,
                        })
                    })
                    .collect();
                g.transform(&z, out);
            }
            InitialLaw::Dirac(x) => out.copy_from_slice(x),
            InitialLaw::Sampler(f) => {
                let mut rng = CounterRng::new(seed, Domain::Init, k, 0);
                f(&mut rng, out);
            }
        }
    }

    pub fn dim(&self) -> Option<usize> {
        match self {
            InitialLaw::Gaussian(g) => Some(g.dim()),
            InitialLaw::Dirac(x) => Some(x.len()),
            InitialLaw::Sampler(_) => None,
        }
    }

    pub fn as_gaussian(&self) -> Result<&GaussianLaw> {
        match self {
            InitialLaw::Gaussian(g) => Ok(g),
            InitialLaw::Dirac(_) => Err(Error::UnsupportedLaw(
                "a point mass has no density".to_string(),
            )),
            InitialLaw::Sampler(_) => Err(Error::UnsupportedLaw("sampler-only law".to_string())),
        }
    }
}

#[cfg(test)]
#[path = "../../tests/unit/law.rs"]
mod tests;
