//! The ε-floored Nadaraya–Watson drift
//! `b̂^i_j(x^j; ν) = ∫ b^i_j(x^j, y^{-j}) K_h(x^j - y^j) dν(y) / max(ε, ∫ K_h(x^j - y^j) dν(y))`
//! and the particle drift built from it.

mod celllist;
mod naive;
mod pairs;

use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{invalid, Error, Result};
use crate::exec::{Executor, Serial};
use crate::kernels::{KernelSpec, ScaledKernel};
use crate::math::{fabs, CompensatedSum};
use crate::models::ModelSpec;
use crate::simulate::ParticleEnsemble;

pub use pairs::PAIR_TILE;

/// Finitely many weighted atoms of `R^{m·d}`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedMeasure {
    atoms: Vec<f64>,
    weights: Vec<f64>,
    m: usize,
    d: usize,
}

impl WeightedMeasure {
    /// `atoms` is row-major, one `m·d` row per atom.
    pub fn new(atoms: Vec<f64>, weights: Vec<f64>, m: usize, d: usize) -> Result<Self> {
        let w = m * d;
        if w == 0 {
            return Err(invalid("m, d", "dimensions must be positive"));
        }
        if weights.is_empty() {
            return Err(Error::Empty("weighted measure"));
        }
        if atoms.len() != weights.len() * w {
            return Err(Error::ShapeMismatch(alloc::format!(
                "{} coordinates for {} atoms of dimension {w}",
                atoms.len(),
                weights.len()
            )));
        }
        if weights.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(invalid("weights", "must be finite and non-negative"));
        }
        let total = crate::math::compensated_sum(&weights);
        if fabs(total - 1.0) > 1e-12 {
            return Err(invalid("weights", alloc::format!("sum to {total}, not 1")));
        }
        Ok(Self {
            atoms,
            weights,
            m,
            d,
        })
    }

    pub fn uniform(atoms: Vec<f64>, m: usize, d: usize) -> Result<Self> {
        let w = m * d;
        if w == 0 || atoms.len() % w != 0 {
            return Err(Error::ShapeMismatch(
                "atom array is not a whole number of rows".to_string(),
            ));
        }
        let count = atoms.len() / w;
        Self::new(atoms, vec![1.0 / count as f64; count], m, d)
    }

    /// The empirical measure `L_n` of an ensemble.
    pub fn empirical(ensemble: &ParticleEnsemble) -> Self {
        let n = ensemble.n();
        Self {
            atoms: ensemble.positions().to_vec(),
            weights: vec![1.0 / n as f64; n],
            m: ensemble.m(),
            d: ensemble.d(),
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn atom(&self, l: usize) -> &[f64] {
        let w = self.m * self.d;
        &self.atoms[l * w..(l + 1) * w]
    }

    pub fn weight(&self, l: usize) -> f64 {
        self.weights[l]
    }
}

/// Bandwidth `h` (variance scale), floor `ε`, kernel.
#[derive(Debug, Clone)]
pub struct DriftParams {
    h: f64,
    epsilon: f64,
    kernel: ScaledKernel,
}

impl DriftParams {
    pub fn new(h: f64, epsilon: f64, kernel: KernelSpec) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(invalid("epsilon", "must be positive and finite"));
        }
        let kernel = ScaledKernel::new(kernel, h)?;
        Ok(Self { h, epsilon, kernel })
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn kernel(&self) -> &KernelSpec {
        self.kernel.base()
    }

    pub fn scaled(&self) -> &ScaledKernel {
        &self.kernel
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        Self::new(self.h, epsilon, self.kernel.base().clone())
    }
}

/// How the pairwise sums are evaluated. Both give the same drift up to
/// summation-order roundoff.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Strategy {
    /// All `n²` pairs, in symmetric tiles.
    #[default]
    Naive,
    /// Uniform grid with cell size equal to the scaled support radius; only
    /// neighbouring cells are visited. Compact kernels only.
    CellList,
}

impl Strategy {
    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Naive => "naive",
            Strategy::CellList => "celllist",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "naive" => Ok(Strategy::Naive),
            "celllist" | "cell-list" => Ok(Strategy::CellList),
            other => Err(invalid(
                "strategy",
                alloc::format!("unknown strategy {other:?}"),
            )),
        }
    }
}

/// `b̂^i_j` at a single query point against an arbitrary weighted measure.
/// The coefficient is evaluated at the mixed point whose block `j` is the
/// query `x_j` and whose other blocks come from the atom.
pub fn nw_block<F>(
    x_j: &[f64],
    j: usize,
    b_ij: F,
    nu: &WeightedMeasure,
    p: &DriftParams,
) -> Result<Vec<f64>>
where
    F: Fn(&[f64], &mut [f64]),
{
    let (m, d) = (nu.m(), nu.d());
    if j >= m {
        return Err(Error::OutOfRange {
            value: j as f64,
            lo: 0.0,
            hi: (m - 1) as f64,
        });
    }
    if x_j.len() != d {
        return Err(Error::ShapeMismatch(alloc::format!(
            "query has {} coordinates, block has {d}",
            x_j.len()
        )));
    }
    let mut mixed = vec![0.0; m * d];
    let mut diff = vec![0.0; d];
    let mut out = vec![0.0; d];
    let mut numerator = vec![CompensatedSum::new(); d];
    let mut denominator = CompensatedSum::new();
    for l in 0..nu.len() {
        let atom = nu.atom(l);
        for c in 0..d {
            diff[c] = x_j[c] - atom[j * d + c];
        }
        let weight = nu.weight(l) * p.scaled().eval(&diff);
        if weight == 0.0 {
            continue;
        }
        denominator.add(weight);
        mixed.copy_from_slice(atom);
        mixed[j * d..(j + 1) * d].copy_from_slice(x_j);
        b_ij(&mixed, &mut out);
        for c in 0..d {
            numerator[c].add(weight * out[c]);
        }
    }
    let floor = denominator.value().max(p.epsilon());
    Ok(numerator.iter().map(|s| s.value() / floor).collect())
}

/// Particle drift together with the kernel denominators that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftField {
    /// `n × m × d`, row-major like the ensemble.
    pub drift: Vec<f64>,
    /// Per block `j`, the averaged denominators `(1/n) Σ_ℓ K_h(X_k^j - X_ℓ^j)`
    /// for every particle; empty for blocks no coefficient conditions on.
    pub denominators: Vec<Vec<f64>>,
}

impl DriftField {
    /// Fraction of particles whose block-`j` denominator is strictly below
    /// `epsilon`; `None` if the block was not evaluated.
    pub fn floor_hit_rate(&self, j: usize, epsilon: f64) -> Option<f64> {
        let den = self.denominators.get(j)?;
        if den.is_empty() {
            return None;
        }
        Some(den.iter().filter(|&&v| v < epsilon).count() as f64 / den.len() as f64)
    }
}

/// Particle drift `Σ_j b̂^i_j(X_k^j; L_n) + V^i(X_k)`, with the query particle
/// included in its own empirical measure.
pub fn particle_drift(
    ensemble: &ParticleEnsemble,
    model: &ModelSpec,
    p: &DriftParams,
    strategy: Strategy,
) -> Result<DriftField> {
    particle_drift_with(ensemble, model, p, strategy, &Serial)
}

pub fn particle_drift_with<E: Executor>(
    ensemble: &ParticleEnsemble,
    model: &ModelSpec,
    p: &DriftParams,
    strategy: Strategy,
    exec: &E,
) -> Result<DriftField> {
    check_shapes(ensemble, model, p)?;
    check_strategy(strategy, p)?;
    let (n, m, d) = (ensemble.n(), ensemble.m(), ensemble.d());
    let width = m * d;
    let mut drift = vec![0.0; n * width];
    exec.for_each_row(&mut drift, width, |k, row| {
        let x = ensemble.particle(k);
        for i in 0..m {
            model.v(i, x, &mut row[i * d..(i + 1) * d]);
        }
    });
    let mut denominators = vec![Vec::new(); m];
    for (j, slot) in denominators.iter_mut().enumerate() {
        let plan = pairs::BlockPlan::new(ensemble, model, j, p, exec);
        if plan.is_inactive() {
            continue;
        }
        let sums = match strategy {
            Strategy::Naive => naive::block_sums(&plan, exec),
            Strategy::CellList => celllist::block_sums(&plan, exec),
        };
        *slot = plan.apply(&sums, p, &mut drift, exec);
    }
    Ok(DriftField {
        drift,
        denominators,
    })
}

/// `(1/n) Σ_ℓ K_h(X_k^j - X_ℓ^j)` for every particle `k`.
pub fn block_denominators<E: Executor>(
    ensemble: &ParticleEnsemble,
    j: usize,
    p: &DriftParams,
    strategy: Strategy,
    exec: &E,
) -> Result<Vec<f64>> {
    if j >= ensemble.m() {
        return Err(Error::OutOfRange {
            value: j as f64,
            lo: 0.0,
            hi: (ensemble.m() - 1) as f64,
        });
    }
    if p.kernel().dim() != ensemble.d() {
        return Err(Error::ShapeMismatch(
            "kernel dimension differs from block dimension".to_string(),
        ));
    }
    check_strategy(strategy, p)?;
    let plan = pairs::BlockPlan::denominators_only(ensemble, j, p);
    let sums = match strategy {
        Strategy::Naive => naive::block_sums(&plan, exec),
        Strategy::CellList => celllist::block_sums(&plan, exec),
    };
    Ok(plan.denominators(&sums, p))
}

/// Fraction of particles whose block-`j` denominator is strictly below `ε`.
pub fn floor_hit_rate(ensemble: &ParticleEnsemble, j: usize, p: &DriftParams) -> Result<f64> {
    floor_hit_rate_with(ensemble, j, p, Strategy::Naive, &Serial)
}

pub fn floor_hit_rate_with<E: Executor>(
    ensemble: &ParticleEnsemble,
    j: usize,
    p: &DriftParams,
    strategy: Strategy,
    exec: &E,
) -> Result<f64> {
    let den = block_denominators(ensemble, j, p, strategy, exec)?;
    Ok(den.iter().filter(|&&v| v < p.epsilon()).count() as f64 / den.len() as f64)
}

fn check_shapes(ensemble: &ParticleEnsemble, model: &ModelSpec, p: &DriftParams) -> Result<()> {
    if ensemble.m() != model.m() || ensemble.d() != model.d() {
        return Err(Error::ShapeMismatch(alloc::format!(
            "ensemble is {}×{}, model is {}×{}",
            ensemble.m(),
            ensemble.d(),
            model.m(),
            model.d()
        )));
    }
    if p.kernel().dim() != model.d() {
        return Err(Error::ShapeMismatch(
            "kernel dimension differs from block dimension".to_string(),
        ));
    }
    Ok(())
}

fn check_strategy(strategy: Strategy, p: &DriftParams) -> Result<()> {
    if strategy == Strategy::CellList && (!p.kernel().is_compact() || p.kernel().radial().is_none())
    {
        return Err(Error::StrategyUnsupported {
            strategy: "celllist",
            kernel: p.kernel().name().to_string(),
        });
    }
    Ok(())
}
