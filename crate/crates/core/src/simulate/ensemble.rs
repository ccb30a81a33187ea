use alloc::vec::Vec;

use crate::error::{Error, Result};

/// `n` particles, each a point of `R^{m·d}`, stored row-major: particle `k`
/// occupies `positions[k*m*d..(k+1)*m*d]`, block `j` inside it
/// `[j*d, (j+1)*d)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleEnsemble {
    positions: Vec<f64>,
    t: f64,
    n: usize,
    m: usize,
    d: usize,
}

impl ParticleEnsemble {
    pub fn new(positions: Vec<f64>, n: usize, m: usize, d: usize, t: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Empty("ensemble"));
        }
        if m == 0 || d == 0 {
            return Err(crate::error::invalid("m, d", "dimensions must be positive"));
        }
        if positions.len() != n * m * d {
            return Err(Error::ShapeMismatch(alloc::format!(
                "{} positions for n={n}, m={m}, d={d}",
                positions.len()
            )));
        }
        if let Some(idx) = positions.iter().position(|v| !v.is_finite()) {
            return Err(Error::ShapeMismatch(alloc::format!(
                "non-finite coordinate at index {idx}"
            )));
        }
        Ok(Self {
            positions,
            t,
            n,
            m,
            d,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn state_dim(&self) -> usize {
        self.m * self.d
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn into_positions(self) -> Vec<f64> {
        self.positions
    }

    pub fn particle(&self, k: usize) -> &[f64] {
        let w = self.state_dim();
        &self.positions[k * w..(k + 1) * w]
    }

    pub fn block(&self, k: usize, j: usize) -> &[f64] {
        let start = k * self.state_dim() + j * self.d;
        &self.positions[start..start + self.d]
    }

    /// Coordinate `c` of block `j` for every particle.
    pub fn marginal(&self, j: usize, c: usize) -> Vec<f64> {
        let w = self.state_dim();
        (0..self.n)
            .map(|k| self.positions[k * w + j * self.d + c])
            .collect()
    }

    /// Keeps the particles listed in `order`, in that order.
    pub fn select(&self, order: &[usize]) -> Result<Self> {
        let w = self.state_dim();
        let mut positions = Vec::with_capacity(order.len() * w);
        for &k in order {
            if k >= self.n {
                return Err(Error::OutOfRange {
                    value: k as f64,
                    lo: 0.0,
                    hi: (self.n - 1) as f64,
                });
            }
            positions.extend_from_slice(self.particle(k));
        }
        Self::new(positions, order.len(), self.m, self.d, self.t)
    }
}
