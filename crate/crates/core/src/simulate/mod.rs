//! Euler–Maruyama integration of the particle system and of oracle limit
//! SDEs.
//!
//! Noise contract: the standard normal increment of particle `k`, block `i`,
//! component `c` at step `s` is a pure function of `(seed, k, i·d + c, s)`,
//! drawn from the [`Domain::Noise`] stream. It does not depend on `n`, on the
//! executor, or on evaluation order.

mod ensemble;

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

pub use ensemble::ParticleEnsemble;

use crate::error::{invalid, Error, Result};
use crate::exec::{Executor, Serial};
use crate::kernels::{KernelId, KernelSpec};
use crate::math::{fabs, sqrt};
use crate::models::{preset_with, ModelSpec, PresetOptions, DEFAULT_SATURATION};
use crate::nwdrift::{particle_drift_with, DriftParams, Strategy};
use crate::rng::{Domain, NoiseKey, StreamAddress, MAX_SLOT};

/// `n` independent draws from `μ₀`; particle `k` depends only on `(seed, k)`.
pub fn init_ensemble(model: &ModelSpec, n: usize, seed: u64) -> Result<ParticleEnsemble> {
    if n == 0 {
        return Err(Error::Empty("ensemble"));
    }
    let w = model.state_dim();
    let mut positions = vec![0.0; n * w];
    for (k, row) in positions.chunks_mut(w).enumerate() {
        model.sample_initial(seed, k as u64, row);
    }
    ParticleEnsemble::new(positions, n, model.m(), model.d(), 0.0)
}

/// Standard normal increment for `(particle, slot, step)`.
#[inline]
pub fn noise(seed_key: &NoiseKey, particle: u64, slot: u32, step: u32) -> f64 {
    seed_key.normal(StreamAddress { domain: Domain::Noise, particle, slot, step })
}

/// Per-step summary of the state the step started from.
#[derive(Debug, Clone, PartialEq)]
pub struct StepDiagnostics {
    pub step: u64,
    pub t: f64,
    /// Per block; `None` where no coefficient conditions on the block.
    pub floor_hit_rates: Vec<Option<f64>>,
    /// Largest absolute drift component.
    pub drift_max: f64,
    /// Per coordinate of the state.
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
}

/// Where a drift comes from.
#[derive(Debug, Clone, Copy)]
pub enum DriftSource<'a> {
    Particles { params: &'a DriftParams, strategy: Strategy },
    /// Independent copies of the limit SDE.
    Oracle,
}

/// One Euler–Maruyama step `X' = X + b(X) dt + √(2 dt) σ ξ` with `ξ` taken
/// from step index `step_index` of the noise contract.
pub fn step<E: Executor>(
    ensemble: &ParticleEnsemble,
    model: &ModelSpec,
    source: DriftSource<'_>,
    dt: f64,
    seed: u64,
    step_index: u64,
    exec: &E,
) -> Result<(ParticleEnsemble, StepDiagnostics)> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(invalid("dt", "must be positive and finite"));
    }
    let step32 = u32::try_from(step_index).map_err(|_| invalid("step", "step index exceeds 2^32 - 1"))?;
    let (n, m, d) = (ensemble.n(), ensemble.m(), ensemble.d());
    let w = m * d;
    if w as u64 > MAX_SLOT as u64 + 1 {
        return Err(Error::UnsupportedDimension { dim: w, max: MAX_SLOT as usize + 1 });
    }
    let (drift, floor_hit_rates) = match source {
        DriftSource::Particles { params, strategy } => {
            let field = particle_drift_with(ensemble, model, params, strategy, exec)?;
            let rates = (0..m).map(|j| field.floor_hit_rate(j, params.epsilon())).collect();
            (field.drift, rates)
        }
        DriftSource::Oracle => {
            let mut drift = vec![0.0; n * w];
            let t = ensemble.t();
            let results = exec.map(n, |k| {
                let mut out = vec![0.0; w];
                model.oracle_drift_into(ensemble.particle(k), t, &mut out).map(|_| out)
            });
            for (k, r) in results.into_iter().enumerate() {
                drift[k * w..(k + 1) * w].copy_from_slice(&r?);
            }
            (drift, vec![None; m])
        }
    };
    if let Some(idx) = drift.iter().position(|v| !v.is_finite()) {
        return Err(Error::SimulationDiverged {
            step: step_index,
            what: alloc::format!("non-finite drift for particle {}", idx / w),
        });
    }
    let drift_max = drift.iter().fold(0.0f64, |a, v| a.max(fabs(*v)));
    let (mean, variance) = moments(ensemble);

    let key = NoiseKey::new(seed);
    let amplitude = sqrt(2.0 * dt) * model.sigma();
    let mut next = ensemble.positions().to_vec();
    exec.for_each_row(&mut next, w, |k, row| {
        let b = &drift[k * w..(k + 1) * w];
        for slot in 0..w {
            let xi = noise(&key, k as u64, slot as u32, step32);
            row[slot] += b[slot] * dt + amplitude * xi;
        }
    });
    if let Some(idx) = next.iter().position(|v| !v.is_finite()) {
        return Err(Error::SimulationDiverged {
            step: step_index,
            what: alloc::format!("non-finite position for particle {}", idx / w),
        });
    }
    let t_next = (step_index + 1) as f64 * dt;
    let diagnostics = StepDiagnostics { step: step_index, t: ensemble.t(), floor_hit_rates, drift_max, mean, variance };
    Ok((ParticleEnsemble::new(next, n, m, d, t_next)?, diagnostics))
}

/// Per-coordinate sample mean and (unbiased, zero for `n = 1`) variance.
pub fn moments(ensemble: &ParticleEnsemble) -> (Vec<f64>, Vec<f64>) {
    let w = ensemble.state_dim();
    let n = ensemble.n();
    let mut mean = vec![0.0; w];
    for k in 0..n {
        for (a, v) in mean.iter_mut().zip(ensemble.particle(k)) {
            *a += v;
        }
    }
    mean.iter_mut().for_each(|a| *a /= n as f64);
    let mut var = vec![0.0; w];
    for k in 0..n {
        for ((a, v), mu) in var.iter_mut().zip(ensemble.particle(k)).zip(&mean) {
            *a += (v - mu) * (v - mu);
        }
    }
    let denom = if n > 1 { (n - 1) as f64 } else { 1.0 };
    var.iter_mut().for_each(|a| *a /= denom);
    (mean, var)
}

/// Full run description.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub n: usize,
    pub h: f64,
    pub epsilon: f64,
    pub dt: f64,
    pub t_end: f64,
    pub seed: u64,
    pub kernel: KernelId,
    pub model: String,
    pub strategy: Strategy,
    pub record_times: Vec<f64>,
    /// Saturation level for presets with unbounded raw coefficients.
    pub saturation: f64,
}

impl SimConfig {
    pub fn new(model: impl Into<String>, n: usize, h: f64, epsilon: f64) -> Self {
        Self {
            n,
            h,
            epsilon,
            dt: 0.01,
            t_end: 1.0,
            seed: 0,
            kernel: KernelId::Gaussian,
            model: model.into(),
            strategy: Strategy::Naive,
            record_times: vec![1.0],
            saturation: DEFAULT_SATURATION,
        }
    }

    /// Number of steps, `round(T / dt)`.
    pub fn steps(&self) -> u64 {
        libm::round(self.t_end / self.dt) as u64
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(invalid("n", "must be at least 1"));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(invalid("dt", "must be positive and finite"));
        }
        if !(self.t_end >= self.dt && self.t_end.is_finite()) {
            return Err(invalid("T", "must be finite and at least dt"));
        }
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(invalid("h", "must be positive and finite"));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(invalid("epsilon", "must be positive and finite"));
        }
        if !(self.saturation > 0.0 && self.saturation.is_finite()) {
            return Err(invalid("saturation", "must be positive and finite"));
        }
        if self.steps() > u32::MAX as u64 {
            return Err(invalid("dt", "too many steps"));
        }
        let end = self.steps() as f64 * self.dt;
        for &t in &self.record_times {
            if !(t >= 0.0 && t <= self.t_end) {
                return Err(invalid("record_times", alloc::format!("{t} is outside [0, T]")));
            }
            if libm::round(t / self.dt) * self.dt > end + 0.5 * self.dt {
                return Err(invalid("record_times", alloc::format!("{t} is after the last step")));
            }
        }
        Ok(())
    }

    pub fn model_spec(&self) -> Result<ModelSpec> {
        preset_with(&self.model, &PresetOptions { saturation: self.saturation })
    }

    /// Drift parameters for blocks of dimension `d`.
    pub fn drift_params(&self, d: usize) -> Result<DriftParams> {
        DriftParams::new(self.h, self.epsilon, KernelSpec::new(self.kernel, d)?)
    }
}

/// Snapshots at the requested times and per-step diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// Sorted, deduplicated record times with the snapshot taken at each.
    pub snapshots: Vec<(f64, ParticleEnsemble)>,
    pub diagnostics: Vec<StepDiagnostics>,
    pub final_state: ParticleEnsemble,
}

impl Trajectory {
    pub fn snapshot_at(&self, t: f64) -> Option<&ParticleEnsemble> {
        self.snapshots.iter().find(|(s, _)| fabs(s - t) < 1e-12).map(|(_, e)| e)
    }
}

/// Runs a preset model described by `config` on one thread.
pub fn run(config: &SimConfig) -> Result<Trajectory> {
    run_with(config, &Serial)
}

pub fn run_with<E: Executor>(config: &SimConfig, exec: &E) -> Result<Trajectory> {
    config.validate()?;
    let model = config.model_spec()?;
    run_model(&model, config, exec)
}

/// Runs the particle system for an arbitrary model; `config.model` and
/// `config.saturation` are ignored.
pub fn run_model<E: Executor>(model: &ModelSpec, config: &SimConfig, exec: &E) -> Result<Trajectory> {
    config.validate()?;
    let params = config.drift_params(model.d())?;
    let initial = init_ensemble(model, config.n, config.seed)?;
    integrate(model, initial, config, DriftSource::Particles { params: &params, strategy: config.strategy }, exec)
}

/// `n_copies` independent paths of the limit SDE driven by the model's
/// oracle drift, with the same noise contract as the particle system.
pub fn run_oracle<E: Executor>(
    model: &ModelSpec,
    n_copies: usize,
    config: &SimConfig,
    exec: &E,
) -> Result<Trajectory> {
    if !model.has_oracle() {
        return Err(Error::NoOracle(model.name().to_string()));
    }
    let mut config = config.clone();
    config.n = n_copies;
    config.validate()?;
    let initial = init_ensemble(model, n_copies, config.seed)?;
    integrate(model, initial, &config, DriftSource::Oracle, exec)
}

fn integrate<E: Executor>(
    model: &ModelSpec,
    initial: ParticleEnsemble,
    config: &SimConfig,
    source: DriftSource<'_>,
    exec: &E,
) -> Result<Trajectory> {
    let steps = config.steps();
    let mut record: Vec<(u64, f64)> =
        config.record_times.iter().map(|&t| (libm::round(t / config.dt) as u64, t)).collect();
    record.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    record.dedup_by(|a, b| a.0 == b.0);

    let mut snapshots = Vec::with_capacity(record.len());
    let mut pending = record.iter().peekable();
    let mut diagnostics = Vec::with_capacity(steps as usize);
    let mut state = initial;
    for s in 0..=steps {
        while let Some(&&(at, t)) = pending.peek() {
            if at != s {
                break;
            }
            snapshots.push((t, state.clone()));
            pending.next();
        }
        if s == steps {
            break;
        }
        let (next, diag) = step(&state, model, source, config.dt, config.seed, s, exec)?;
        diagnostics.push(diag);
        state = next;
    }
    Ok(Trajectory { snapshots, diagnostics, final_state: state })
}
