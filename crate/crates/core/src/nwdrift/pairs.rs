//! Per-block bookkeeping shared by the evaluation strategies.
//!
//! For a conditioning block `j`, every particle `k` needs
//! `S_k = Σ_ℓ κ(k, ℓ) · (1, g_1(k, ℓ), …)` where `κ` is the kernel profile on
//! pre-scaled coordinates and the `g` are the coefficient channels that
//! cannot be factored out of the sum. Kernel normalisation and the `1/n`
//! weight are applied once at the end.

use alloc::vec;
use alloc::vec::Vec;

use crate::exec::Executor;
use crate::kernels::{KernelSpec, Profile};
use crate::models::{Dependence, ModelSpec};
use crate::simulate::ParticleEnsemble;

use super::DriftParams;

/// Side length of the square pair tiles of the naive strategy.
pub const PAIR_TILE: usize = 128;

#[derive(Clone, Copy)]
pub(crate) enum PairKernel<'a> {
    Radial(Profile),
    Custom(&'a KernelSpec),
}

enum Channel {
    /// `b^i_j` reads block `j` only; its numerator is `b(x_k) · D_k`.
    Query { i: usize },
    /// `b^i_j` ignores block `j`; values at each atom are precomputed.
    Atom { i: usize, values: Vec<f64> },
    /// Evaluated per pair at the mixed point.
    Mixed { i: usize },
}

pub(crate) struct BlockPlan<'a> {
    ensemble: &'a ParticleEnsemble,
    model: Option<&'a ModelSpec>,
    j: usize,
    d: usize,
    /// Block-`j` coordinates divided by `√h`, `n × d`.
    coords: Vec<f64>,
    kernel: PairKernel<'a>,
    /// Multiplies profile sums to give `Σ_ℓ K_h`.
    scale: f64,
    /// Squared support radius in scaled coordinates (infinite if unbounded).
    support2: f64,
    channels: Vec<Channel>,
    width: usize,
}

impl<'a> BlockPlan<'a> {
    pub(crate) fn new<E: Executor>(
        ensemble: &'a ParticleEnsemble,
        model: &'a ModelSpec,
        j: usize,
        p: &'a DriftParams,
        exec: &E,
    ) -> Self {
        let mut plan = Self::denominators_only(ensemble, j, p);
        plan.model = Some(model);
        let d = ensemble.d();
        for i in 0..model.m() {
            match model.dependence(i, j) {
                Dependence::Zero => {}
                Dependence::QueryOnly => plan.channels.push(Channel::Query { i }),
                Dependence::AtomOnly => {
                    let mut values = vec![0.0; ensemble.n() * d];
                    exec.for_each_row(&mut values, d, |l, row| {
                        model.b(i, j, ensemble.particle(l), row)
                    });
                    plan.channels.push(Channel::Atom { i, values });
                    plan.width += d;
                }
                Dependence::Mixed => {
                    plan.channels.push(Channel::Mixed { i });
                    plan.width += d;
                }
            }
        }
        plan
    }

    pub(crate) fn denominators_only(
        ensemble: &'a ParticleEnsemble,
        j: usize,
        p: &'a DriftParams,
    ) -> Self {
        let d = ensemble.d();
        let scaled = p.scaled();
        let inv = scaled.inv_sqrt_h();
        let coords = (0..ensemble.n())
            .flat_map(|k| ensemble.block(k, j).iter().map(move |v| v * inv))
            .collect();
        let base = scaled.base();
        let (kernel, scale) = match base.radial() {
            Some((profile, norm)) => (PairKernel::Radial(profile), scaled.amplitude() * norm),
            None => (PairKernel::Custom(base), scaled.amplitude()),
        };
        let radius = base.support_radius();
        Self {
            ensemble,
            model: None,
            j,
            d,
            coords,
            kernel,
            scale,
            support2: radius * radius,
            channels: Vec::new(),
            width: 1,
        }
    }

    pub(crate) fn is_inactive(&self) -> bool {
        self.channels.is_empty()
    }

    pub(crate) fn n(&self) -> usize {
        self.ensemble.n()
    }

    pub(crate) fn d(&self) -> usize {
        self.d
    }

    pub(crate) fn width(&self) -> usize {
        self.width
    }

    pub(crate) fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub(crate) fn support2(&self) -> f64 {
        self.support2
    }

    pub(crate) fn kernel(&self) -> PairKernel<'a> {
        self.kernel
    }

    /// True when only kernel sums are needed.
    pub(crate) fn sums_only(&self) -> bool {
        self.width == 1
    }

    pub(crate) fn scratch(&self) -> Scratch {
        Scratch {
            mixed: vec![0.0; self.ensemble.state_dim()],
            out: vec![0.0; self.d],
            diff: vec![0.0; self.d],
        }
    }

    /// Unnormalised kernel weight between particles `k` and `l`.
    #[inline(always)]
    pub(crate) fn pair_weight(&self, k: usize, l: usize, scratch: &mut Scratch) -> f64 {
        let d = self.d;
        let a = &self.coords[k * d..(k + 1) * d];
        let b = &self.coords[l * d..(l + 1) * d];
        match self.kernel {
            PairKernel::Radial(profile) => {
                let mut r2 = 0.0;
                for c in 0..d {
                    let t = a[c] - b[c];
                    r2 += t * t;
                }
                profile.eval(r2)
            }
            PairKernel::Custom(spec) => {
                for c in 0..d {
                    scratch.diff[c] = a[c] - b[c];
                }
                spec.density(&scratch.diff)
            }
        }
    }

    /// Adds `weight · (1, g(k, l)…)` to `row`, the accumulator of particle
    /// `k` against atom `l`.
    #[inline]
    pub(crate) fn accumulate(
        &self,
        k: usize,
        l: usize,
        weight: f64,
        row: &mut [f64],
        scratch: &mut Scratch,
    ) {
        row[0] += weight;
        if self.width == 1 || weight == 0.0 {
            return;
        }
        let d = self.d;
        let mut offset = 1;
        for channel in &self.channels {
            match channel {
                Channel::Query { .. } => {}
                Channel::Atom { values, .. } => {
                    for c in 0..d {
                        row[offset + c] += weight * values[l * d + c];
                    }
                    offset += d;
                }
                Channel::Mixed { i } => {
                    let model = self.model.expect("mixed channels require a model");
                    scratch.mixed.copy_from_slice(self.ensemble.particle(l));
                    scratch.mixed[self.j * d..(self.j + 1) * d]
                        .copy_from_slice(self.ensemble.block(k, self.j));
                    model.b(*i, self.j, &scratch.mixed, &mut scratch.out);
                    for c in 0..d {
                        row[offset + c] += weight * scratch.out[c];
                    }
                    offset += d;
                }
            }
        }
    }

    pub(crate) fn denominators(&self, sums: &[f64], _p: &DriftParams) -> Vec<f64> {
        let factor = self.scale / self.n() as f64;
        (0..self.n())
            .map(|k| factor * sums[k * self.width])
            .collect()
    }

    /// Adds `b̂^i_j` for every channel into `drift`; returns the denominators.
    pub(crate) fn apply<E: Executor>(
        &self,
        sums: &[f64],
        p: &DriftParams,
        drift: &mut [f64],
        exec: &E,
    ) -> Vec<f64> {
        let (m, d, j) = (self.ensemble.m(), self.d, self.j);
        let width = self.width;
        let factor = self.scale / self.n() as f64;
        let epsilon = p.epsilon();
        let denominators = self.denominators(sums, p);
        exec.for_each_row(drift, m * d, |k, row| {
            let den = denominators[k];
            let floor = den.max(epsilon);
            let s = &sums[k * width..(k + 1) * width];
            let mut offset = 1;
            let mut query = vec![0.0; d];
            for channel in &self.channels {
                match channel {
                    Channel::Query { i } => {
                        let model = self.model.expect("query channels require a model");
                        model.b(*i, j, self.ensemble.particle(k), &mut query);
                        for c in 0..d {
                            row[i * d + c] += query[c] * den / floor;
                        }
                    }
                    Channel::Atom { i, .. } | Channel::Mixed { i } => {
                        for c in 0..d {
                            row[i * d + c] += factor * s[offset + c] / floor;
                        }
                        offset += d;
                    }
                }
            }
        });
        denominators
    }
}

pub(crate) struct Scratch {
    mixed: Vec<f64>,
    out: Vec<f64>,
    diff: Vec<f64>,
}
