use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::math::{fabs, CompensatedSum};
use crate::simulate::ParticleEnsemble;

/// Uniform bins on `[lo, hi)`, the last bin closed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub bins: usize,
}

impl Axis {
    pub fn new(lo: f64, hi: f64, bins: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && hi > lo) {
            return Err(invalid("axis", "need finite lo < hi"));
        }
        if bins == 0 {
            return Err(invalid("bins", "must be positive"));
        }
        Ok(Self { lo, hi, bins })
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.bins as f64
    }

    pub fn edges(&self) -> Vec<f64> {
        (0..=self.bins).map(|i| self.lo + self.width() * i as f64).collect()
    }

    fn locate(&self, x: f64, overflow: Overflow) -> Option<usize> {
        if x >= self.lo && x <= self.hi {
            let i = ((x - self.lo) / self.width()) as usize;
            return Some(i.min(self.bins - 1));
        }
        match overflow {
            Overflow::Clamp if x < self.lo => Some(0),
            Overflow::Clamp if x > self.hi => Some(self.bins - 1),
            _ => None,
        }
    }
}

/// What happens to samples outside the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Overflow {
    /// Counted in the nearest edge bin.
    Clamp,
    /// Rejected with an error.
    Reject,
}

/// Tensor grid over `R^D`.
#[derive(Debug, Clone, PartialEq)]
pub struct HistogramGrid {
    pub axes: Vec<Axis>,
    pub overflow: Overflow,
}

impl HistogramGrid {
    pub fn new(axes: Vec<Axis>, overflow: Overflow) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::Empty("histogram axes"));
        }
        Ok(Self { axes, overflow })
    }

    /// One axis spanning the pooled range of the samples.
    pub fn covering(samples: &[&[f64]], bins: usize) -> Result<Self> {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for s in samples {
            for &x in s.iter() {
                lo = lo.min(x);
                hi = hi.max(x);
            }
        }
        if !lo.is_finite() {
            return Err(Error::Empty("samples"));
        }
        if hi == lo {
            hi = lo + 1.0;
        }
        Self::new(vec![Axis::new(lo, hi, bins)?], Overflow::Reject)
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn cells(&self) -> usize {
        self.axes.iter().map(|a| a.bins).product()
    }
}

/// Binned counts with a probability normalisation.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub grid: HistogramGrid,
    pub counts: Vec<u64>,
    pub total: u64,
}

impl Histogram {
    /// `samples` is row-major with `grid.dim()` coordinates per row.
    pub fn from_samples(samples: &[f64], grid: &HistogramGrid) -> Result<Self> {
        let dim = grid.dim();
        if samples.is_empty() {
            return Err(Error::Empty("samples"));
        }
        if samples.len() % dim != 0 {
            return Err(Error::ShapeMismatch("sample array is not a whole number of rows".into()));
        }
        let mut counts = vec![0u64; grid.cells()];
        for row in samples.chunks(dim) {
            let mut index = 0;
            for (axis, &x) in grid.axes.iter().zip(row) {
                let i = axis.locate(x, grid.overflow).ok_or(Error::OutOfRange { value: x, lo: axis.lo, hi: axis.hi })?;
                index = index * axis.bins + i;
            }
            counts[index] += 1;
        }
        Ok(Self { grid: grid.clone(), counts, total: (samples.len() / dim) as u64 })
    }

    pub fn probabilities(&self) -> Vec<f64> {
        let total = self.total as f64;
        self.counts.iter().map(|&c| c as f64 / total).collect()
    }
}

/// Which coordinates of each particle to bin.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Marginal {
    pub block: usize,
    /// A single component, or the whole block when `None`.
    pub component: Option<usize>,
}

impl Marginal {
    fn extract(&self, e: &ParticleEnsemble) -> Result<Vec<f64>> {
        if self.block >= e.m() {
            return Err(Error::OutOfRange { value: self.block as f64, lo: 0.0, hi: (e.m() - 1) as f64 });
        }
        match self.component {
            Some(c) if c >= e.d() => Err(Error::OutOfRange { value: c as f64, lo: 0.0, hi: (e.d() - 1) as f64 }),
            Some(c) => Ok(e.marginal(self.block, c)),
            None => Ok((0..e.n()).flat_map(|k| e.block(k, self.block).iter().copied()).collect()),
        }
    }
}

/// L¹ distance between the binned marginals of two ensembles. Biased by the
/// binning; only meaningful for comparisons on a shared grid.
pub fn histogram_tv(e1: &ParticleEnsemble, e2: &ParticleEnsemble, marginal: Marginal, grid: &HistogramGrid) -> Result<f64> {
    let a = marginal.extract(e1)?;
    let b = marginal.extract(e2)?;
    histogram_tv_samples(&a, &b, grid)
}

pub fn histogram_tv_samples(a: &[f64], b: &[f64], grid: &HistogramGrid) -> Result<f64> {
    let ha = Histogram::from_samples(a, grid)?;
    let hb = Histogram::from_samples(b, grid)?;
    let mut acc = CompensatedSum::new();
    for (x, y) in ha.probabilities().iter().zip(hb.probabilities()) {
        acc.add(fabs(x - y));
    }
    Ok(acc.value())
}
