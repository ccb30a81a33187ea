use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::math::{self, fabs, log, pow, CompensatedSum};

/// Probability vector over a finite alphabet `{0, …, len-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDistribution {
    probabilities: Vec<f64>,
}

impl DiscreteDistribution {
    /// Entries must be non-negative and sum to 1 within `1e-12`.
    pub fn new(probabilities: Vec<f64>) -> Result<Self> {
        if probabilities.is_empty() {
            return Err(Error::Empty("distribution"));
        }
        if probabilities.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
            return Err(invalid("probabilities", "entries must be finite and non-negative"));
        }
        let total = math::compensated_sum(&probabilities);
        if fabs(total - 1.0) > 1e-12 {
            return Err(invalid("probabilities", alloc::format!("sum to {total}, not 1")));
        }
        Ok(Self { probabilities })
    }

    /// Normalizes non-negative weights with a positive total.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        if weights.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
            return Err(invalid("weights", "entries must be finite and non-negative"));
        }
        let total = math::compensated_sum(weights);
        if !(total > 0.0) {
            return Err(invalid("weights", "total must be positive"));
        }
        Self::new(weights.iter().map(|w| w / total).collect())
    }

    pub fn uniform(len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::Empty("distribution"));
        }
        Ok(Self { probabilities: alloc::vec![1.0 / len as f64; len] })
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    /// Image under a row-stochastic matrix `kernel` (`len × out_len`,
    /// row-major): `(aM)_y = Σ_x a_x M(x, y)`.
    pub fn push_forward(&self, kernel: &[f64], out_len: usize) -> Result<Self> {
        if out_len == 0 || kernel.len() != self.len() * out_len {
            return Err(Error::ShapeMismatch(alloc::format!(
                "stochastic matrix has {} entries, expected {}×{out_len}",
                kernel.len(),
                self.len()
            )));
        }
        let mut out = alloc::vec![CompensatedSum::new(); out_len];
        for (x, &a) in self.probabilities.iter().enumerate() {
            for (y, slot) in out.iter_mut().enumerate() {
                slot.add(a * kernel[x * out_len + y]);
            }
        }
        let raw: Vec<f64> = out.iter().map(|s| s.value()).collect();
        // Renormalize away roundoff in the row sums.
        Self::from_weights(&raw)
    }
}

fn check_alphabet(a: &DiscreteDistribution, b: &DiscreteDistribution) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::AlphabetMismatch { left: a.len(), right: b.len() });
    }
    Ok(())
}

/// `Σ |a_i - b_i|`, in `[0, 2]`.
pub fn tv(a: &DiscreteDistribution, b: &DiscreteDistribution) -> Result<f64> {
    check_alphabet(a, b)?;
    let mut acc = CompensatedSum::new();
    for (x, y) in a.probabilities.iter().zip(&b.probabilities) {
        acc.add(fabs(x - y));
    }
    Ok(acc.value())
}

/// `Σ a_i log(a_i / b_i)` with `0 log 0 = 0`; `+∞` if some `a_i > 0 = b_i`.
pub fn kl(a: &DiscreteDistribution, b: &DiscreteDistribution) -> Result<f64> {
    check_alphabet(a, b)?;
    let mut acc = CompensatedSum::new();
    for (&x, &y) in a.probabilities.iter().zip(&b.probabilities) {
        if x == 0.0 {
            continue;
        }
        if y == 0.0 {
            return Ok(f64::INFINITY);
        }
        acc.add(x * log(x / y));
    }
    Ok(acc.value().max(0.0))
}

/// `D₂ - 1 = Σ (a_i - b_i)² / b_i`; `+∞` off support.
pub fn chi2(a: &DiscreteDistribution, b: &DiscreteDistribution) -> Result<f64> {
    check_alphabet(a, b)?;
    let mut acc = CompensatedSum::new();
    for (&x, &y) in a.probabilities.iter().zip(&b.probabilities) {
        if y == 0.0 {
            if x > 0.0 {
                return Ok(f64::INFINITY);
            }
            continue;
        }
        acc.add((x - y) * (x - y) / y);
    }
    Ok(acc.value())
}

/// `D_p = Σ (a_i / b_i)^p b_i` for `p ≥ 1`; `+∞` off support.
pub fn d_p(a: &DiscreteDistribution, b: &DiscreteDistribution, p: f64) -> Result<f64> {
    check_alphabet(a, b)?;
    if !(p >= 1.0 && p.is_finite()) {
        return Err(invalid("p", "order must be finite and at least 1"));
    }
    let mut acc = CompensatedSum::new();
    for (&x, &y) in a.probabilities.iter().zip(&b.probabilities) {
        if y == 0.0 {
            if x > 0.0 {
                return Ok(f64::INFINITY);
            }
            continue;
        }
        acc.add(pow(x / y, p) * y);
    }
    Ok(acc.value())
}
