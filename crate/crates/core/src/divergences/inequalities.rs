//! Randomized checks of the classical information inequalities against the
//! implementations in this module.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use super::discrete::{chi2, d_p, kl, tv, DiscreteDistribution};
use crate::error::{invalid, Result};
use crate::exec::{Executor, Serial};
use crate::math::{self, fabs, log, CompensatedSum};
use crate::rng::{CounterRng, Domain};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quantity {
    /// `tv² ≤ 2 kl`.
    Pinsker,
    /// `kl ≤ χ²`.
    KlBelowChi2,
    DataProcessingTv,
    DataProcessingKl,
    DataProcessingChi2,
    DataProcessingD4,
    /// `kl(joint) = kl(first) + E kl(conditional)`, within `1e-10`.
    ChainRule,
    /// `∫φ da - log ∫e^φ db ≤ kl(a ‖ b)`.
    DonskerVaradhan,
}

impl Quantity {
    pub const ALL: [Quantity; 8] = [
        Quantity::Pinsker,
        Quantity::KlBelowChi2,
        Quantity::DataProcessingTv,
        Quantity::DataProcessingKl,
        Quantity::DataProcessingChi2,
        Quantity::DataProcessingD4,
        Quantity::ChainRule,
        Quantity::DonskerVaradhan,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Quantity::Pinsker => "pinsker",
            Quantity::KlBelowChi2 => "kl_le_chi2",
            Quantity::DataProcessingTv => "dpi_tv",
            Quantity::DataProcessingKl => "dpi_kl",
            Quantity::DataProcessingChi2 => "dpi_chi2",
            Quantity::DataProcessingD4 => "dpi_d4",
            Quantity::ChainRule => "chain_rule",
            Quantity::DonskerVaradhan => "donsker_varadhan",
        }
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One checked inequality `lhs ≤ rhs` (or `|lhs - rhs| ≤ 1e-10` for the
/// chain rule).
#[derive(Debug, Clone, PartialEq)]
pub struct InequalityRow {
    pub trial: u64,
    pub quantity: Quantity,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
    /// The pair that was tested, kept for failing rows only.
    pub counterexample: Option<(Vec<f64>, Vec<f64>)>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct InequalityReport {
    pub rows: Vec<InequalityRow>,
}

impl InequalityReport {
    pub fn violations(&self) -> impl Iterator<Item = &InequalityRow> {
        self.rows.iter().filter(|r| !r.pass)
    }

    pub fn violation_count(&self) -> usize {
        self.violations().count()
    }

    pub fn trials(&self) -> usize {
        self.rows.iter().map(|r| r.trial).max().map_or(0, |t| t as usize + 1)
    }
}

const CHAIN_TOLERANCE: f64 = 1e-10;
const MAX_ALPHABET: usize = 32;

pub fn inequality_suite(trials: usize, seed: u64) -> Result<InequalityReport> {
    inequality_suite_with(trials, seed, &Serial)
}

/// Trial `t` draws everything from its own stream, so the report does not
/// depend on the executor.
pub fn inequality_suite_with<E: Executor>(trials: usize, seed: u64, exec: &E) -> Result<InequalityReport> {
    if trials == 0 {
        return Err(invalid("trials", "must be at least 1"));
    }
    let per_trial = exec.map(trials, |t| run_trial(seed, t as u64));
    let mut rows = Vec::with_capacity(trials * Quantity::ALL.len());
    for r in per_trial {
        rows.extend(r?);
    }
    Ok(InequalityReport { rows })
}

/// Roundoff allowance for `lhs ≤ rhs`.
fn le(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs || lhs <= rhs + 1e-12 * (1.0 + fabs(rhs))
}

fn random_distribution(rng: &mut CounterRng, len: usize, sparse: bool) -> Result<DiscreteDistribution> {
    let mut w: Vec<f64> = (0..len).map(|_| rng.exponential()).collect();
    if sparse {
        for v in w.iter_mut() {
            if rng.uniform() < 0.3 {
                *v = 0.0;
            }
        }
        if w.iter().all(|v| *v == 0.0) {
            w[rng.below(len as u32) as usize] = 1.0;
        }
    }
    DiscreteDistribution::from_weights(&w)
}

fn random_stochastic(rng: &mut CounterRng, rows: usize, cols: usize) -> Vec<f64> {
    let mut m = vec![0.0; rows * cols];
    for r in 0..rows {
        let row = &mut m[r * cols..(r + 1) * cols];
        let mut total = 0.0;
        for v in row.iter_mut() {
            *v = if rng.uniform() < 0.2 { 0.0 } else { rng.exponential() };
            total += *v;
        }
        if total == 0.0 {
            row[0] = 1.0;
            total = 1.0;
        }
        row.iter_mut().for_each(|v| *v /= total);
    }
    m
}

fn run_trial(seed: u64, trial: u64) -> Result<Vec<InequalityRow>> {
    let mut rng = CounterRng::new(seed, Domain::Auxiliary, trial, 0);
    let len = 2 + rng.below(MAX_ALPHABET as u32 - 1) as usize;
    let sparse_a = rng.uniform() < 0.25;
    let a = random_distribution(&mut rng, len, sparse_a)?;
    // Occasionally b misses part of a's support, making kl and χ² infinite.
    let b = if rng.uniform() < 0.05 {
        a.clone()
    } else {
        let sparse_b = rng.uniform() < 0.1;
        random_distribution(&mut rng, len, sparse_b)?
    };
    let mut rows = Vec::with_capacity(Quantity::ALL.len());
    let mut push = |quantity, lhs: f64, rhs: f64, pass: bool| {
        let counterexample = (!pass).then(|| (a.probabilities().to_vec(), b.probabilities().to_vec()));
        rows.push(InequalityRow { trial, quantity, lhs, rhs, pass, counterexample });
    };

    let t = tv(&a, &b)?;
    let k = kl(&a, &b)?;
    let c = chi2(&a, &b)?;
    let d4 = d_p(&a, &b, 4.0)?;
    push(Quantity::Pinsker, t * t, 2.0 * k, le(t * t, 2.0 * k));
    push(Quantity::KlBelowChi2, k, c, le(k, c));

    let out = 2 + rng.below(MAX_ALPHABET as u32 - 1) as usize;
    let kernel = random_stochastic(&mut rng, len, out);
    let ma = a.push_forward(&kernel, out)?;
    let mb = b.push_forward(&kernel, out)?;
    let pairs = [
        (Quantity::DataProcessingTv, tv(&ma, &mb)?, t),
        (Quantity::DataProcessingKl, kl(&ma, &mb)?, k),
        (Quantity::DataProcessingChi2, chi2(&ma, &mb)?, c),
        (Quantity::DataProcessingD4, d_p(&ma, &mb, 4.0)?, d4),
    ];
    for (q, lhs, rhs) in pairs {
        push(q, lhs, rhs, le(lhs, rhs));
    }

    let (lhs, rhs) = chain_rule_trial(&mut rng)?;
    push(Quantity::ChainRule, lhs, rhs, fabs(lhs - rhs) <= CHAIN_TOLERANCE);

    let phi: Vec<f64> = (0..len).map(|_| rng.uniform_in(-5.0, 5.0)).collect();
    let mut first = CompensatedSum::new();
    let mut second = CompensatedSum::new();
    for ((&x, &y), &f) in a.probabilities().iter().zip(b.probabilities()).zip(&phi) {
        first.add(f * x);
        second.add(math::exp(f) * y);
    }
    let dv = first.value() - log(second.value());
    push(Quantity::DonskerVaradhan, dv, k, le(dv, k));
    Ok(rows)
}

/// Joint laws `a(x, y) = a₁(x) a₂(y | x)` on an alphabet of at most 32
/// points, with full-support `b` so both sides are finite.
fn chain_rule_trial(rng: &mut CounterRng) -> Result<(f64, f64)> {
    let nx = 2 + rng.below(7) as usize;
    let ny = 2 + rng.below(3) as usize;
    let a1 = random_distribution(rng, nx, false)?;
    let b1 = random_distribution(rng, nx, false)?;
    let a2: Vec<DiscreteDistribution> = (0..nx).map(|_| random_distribution(rng, ny, false)).collect::<Result<_>>()?;
    let b2: Vec<DiscreteDistribution> = (0..nx).map(|_| random_distribution(rng, ny, false)).collect::<Result<_>>()?;
    let joint = |p1: &DiscreteDistribution, p2: &[DiscreteDistribution]| {
        let w: Vec<f64> = (0..nx)
            .flat_map(|x| p2[x].probabilities().iter().map(move |q| p1.probabilities()[x] * q).collect::<Vec<_>>())
            .collect();
        DiscreteDistribution::from_weights(&w)
    };
    let lhs = kl(&joint(&a1, &a2)?, &joint(&b1, &b2)?)?;
    let mut rhs = CompensatedSum::new();
    rhs.add(kl(&a1, &b1)?);
    for x in 0..nx {
        rhs.add(a1.probabilities()[x] * kl(&a2[x], &b2[x])?);
    }
    Ok((lhs, rhs.value()))
}
