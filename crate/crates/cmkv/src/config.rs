//! TOML configuration files.
//!
//! A run file sets the keys of one simulation; a plan file adds a `[sweep]`
//! table listing values to sweep. Unknown keys are errors, and every error
//! names the dotted key it concerns.
//!
//! ```toml
//! model = "decoupled-oracle"   # required, a preset name
//! n = 1000                     # required
//! T = 1.0                      # required, final time
//! dt = 0.01
//! seed = 0                     # below 2^63
//! kernel = "gaussian"          # gaussian | epanechnikov | uniform-ball
//! strategy = "naive"           # naive | celllist
//! record_times = [1.0]         # defaults to [T]
//! saturation = 10.0
//! # h and epsilon default to the schedule below.
//!
//! [schedule]
//! r = 0.5
//! C = 1.0
//!
//! [sweep]                      # plan files only
//! n = [100, 1000, 10000]       # axes: n, h, epsilon, dt, seed
//! seed = [0, 1, 2]
//! auto_schedule = true         # h, epsilon from the schedule for each n
//! comparisons = ["oracle"]     # oracle | n
//! oracle_copies = 100000
//! oracle_seed = 122524250221925
//! bins = 50
//! block = 0                    # block whose marginal is compared
//! max_runs = 10000
//! ```

use std::path::Path;

use cmkv_core::models::{preset_with, PresetOptions, DEFAULT_SATURATION};
use cmkv_core::schedule::schedule;
use cmkv_core::{KernelId, SimConfig, Strategy};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

pub const DEFAULT_R: f64 = 0.5;
pub const DEFAULT_C: f64 = 1.0;
pub const DEFAULT_DT: f64 = 0.01;
pub const DEFAULT_MAX_RUNS: usize = 10_000;
pub const DEFAULT_ORACLE_COPIES: usize = 100_000;
pub const DEFAULT_BINS: usize = 50;
/// ASCII "oracle"; kept apart from small particle seeds.
pub const DEFAULT_ORACLE_SEED: u64 = 0x6f72_6163_6c65;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub model: Option<String>,
    pub n: Option<usize>,
    #[serde(rename = "T")]
    pub t_end: Option<f64>,
    pub dt: Option<f64>,
    pub h: Option<f64>,
    pub epsilon: Option<f64>,
    pub seed: Option<u64>,
    pub kernel: Option<String>,
    pub strategy: Option<String>,
    pub record_times: Option<Vec<f64>>,
    pub saturation: Option<f64>,
    pub schedule: Option<RawSchedule>,
    pub sweep: Option<RawSweep>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSchedule {
    pub r: Option<f64>,
    #[serde(rename = "C")]
    pub c: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSweep {
    pub n: Option<Vec<usize>>,
    pub h: Option<Vec<f64>>,
    pub epsilon: Option<Vec<f64>>,
    pub dt: Option<Vec<f64>>,
    pub seed: Option<Vec<u64>>,
    pub auto_schedule: Option<bool>,
    pub comparisons: Option<Vec<String>>,
    pub oracle_copies: Option<usize>,
    pub oracle_seed: Option<u64>,
    pub bins: Option<usize>,
    pub block: Option<usize>,
    pub max_runs: Option<usize>,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub strategy: Option<Strategy>,
    pub auto_schedule: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduleSettings {
    pub r: f64,
    pub c: f64,
}

impl Default for ScheduleSettings {
    fn default() -> Self {
        Self { r: DEFAULT_R, c: DEFAULT_C }
    }
}

/// A fully resolved single run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub sim: SimConfig,
    pub schedule: ScheduleSettings,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparison {
    /// Particle terminal marginal against the oracle reference.
    Oracle,
    /// Each cell against the largest-n cell sharing its other axis values.
    LargestN,
}

impl Comparison {
    pub fn as_str(self) -> &'static str {
        match self {
            Comparison::Oracle => "oracle",
            Comparison::LargestN => "n",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SweepAxis {
    N(Vec<usize>),
    H(Vec<f64>),
    Epsilon(Vec<f64>),
    Dt(Vec<f64>),
    Seed(Vec<u64>),
}

impl SweepAxis {
    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::N(_) => "n",
            SweepAxis::H(_) => "h",
            SweepAxis::Epsilon(_) => "epsilon",
            SweepAxis::Dt(_) => "dt",
            SweepAxis::Seed(_) => "seed",
        }
    }

    pub fn len(&self) -> usize {
        match self {
            SweepAxis::N(v) => v.len(),
            SweepAxis::Seed(v) => v.len(),
            SweepAxis::H(v) | SweepAxis::Epsilon(v) | SweepAxis::Dt(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn apply(&self, index: usize, raw: &mut RawConfig) {
        match self {
            SweepAxis::N(v) => raw.n = Some(v[index]),
            SweepAxis::H(v) => raw.h = Some(v[index]),
            SweepAxis::Epsilon(v) => raw.epsilon = Some(v[index]),
            SweepAxis::Dt(v) => raw.dt = Some(v[index]),
            SweepAxis::Seed(v) => raw.seed = Some(v[index]),
        }
    }
}

/// One sweep cell; `id` is its position in the cartesian product with the
/// last axis varying fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub id: usize,
    pub config: RunConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    /// The file without its `[sweep]` table.
    pub base: RawConfig,
    pub axes: Vec<SweepAxis>,
    pub auto_schedule: bool,
    pub comparisons: Vec<Comparison>,
    pub oracle_copies: usize,
    pub oracle_seed: u64,
    pub bins: usize,
    pub block: usize,
    pub max_runs: usize,
    /// Expanded and resolved cells.
    pub cells: Vec<Cell>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Loaded {
    Run(RunConfig),
    Plan(ExperimentPlan),
}

pub fn load_config(path: &Path, overrides: &Overrides) -> Result<Loaded> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_config(&text, overrides)
}

pub fn parse_config(text: &str, overrides: &Overrides) -> Result<Loaded> {
    let mut raw = parse_raw(text)?;
    if let Some(seed) = overrides.seed {
        raw.seed = Some(seed);
    }
    if let Some(strategy) = overrides.strategy {
        raw.strategy = Some(strategy.to_string());
    }
    match raw.sweep.take() {
        Some(mut sweep) => {
            if overrides.auto_schedule {
                sweep.auto_schedule = Some(true);
            }
            Ok(Loaded::Plan(resolve_plan(raw, sweep)?))
        }
        None => {
            if overrides.auto_schedule {
                raw.h = None;
                raw.epsilon = None;
            }
            Ok(Loaded::Run(resolve_run(&raw)?))
        }
    }
}

pub fn parse_raw(text: &str) -> Result<RawConfig> {
    let de = toml::Deserializer::new(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let message = e.into_inner().message().to_string();
        let mut key = if path == "." { String::new() } else { path };
        // Unknown keys are reported against their parent table.
        if let Some(rest) = message.strip_prefix("unknown field `") {
            if let Some(field) = rest.split('`').next().filter(|f| !key.ends_with(f)) {
                if !key.is_empty() {
                    key.push('.');
                }
                key.push_str(field);
            }
        }
        if key.is_empty() {
            key.push_str("<root>");
        }
        CliError::config(key, message)
    })
}

fn missing(key: &str) -> CliError {
    CliError::config(key, "missing required field")
}

fn map_core(prefix: &str, e: cmkv_core::Error) -> CliError {
    match e {
        cmkv_core::Error::InvalidParameter { name, reason } => CliError::config(format!("{prefix}{name}"), reason),
        other => CliError::Core(other),
    }
}

pub fn resolve_run(raw: &RawConfig) -> Result<RunConfig> {
    let model = raw.model.clone().ok_or_else(|| missing("model"))?;
    let n = raw.n.ok_or_else(|| missing("n"))?;
    if n == 0 {
        return Err(CliError::config("n", "must be at least 1"));
    }
    let t_end = raw.t_end.ok_or_else(|| missing("T"))?;
    let schedule_raw = raw.schedule.clone().unwrap_or_default();
    let settings = ScheduleSettings {
        r: schedule_raw.r.unwrap_or(DEFAULT_R),
        c: schedule_raw.c.unwrap_or(DEFAULT_C),
    };

    let mut sim = SimConfig::new(model, n, 0.0, 0.0);
    sim.t_end = t_end;
    sim.dt = raw.dt.unwrap_or(DEFAULT_DT);
    sim.seed = raw.seed.unwrap_or(0);
    if sim.seed > i64::MAX as u64 {
        return Err(CliError::config("seed", "must be below 2^63"));
    }
    if let Some(k) = &raw.kernel {
        sim.kernel = k.parse::<KernelId>().map_err(|e| CliError::config("kernel", e.to_string()))?;
    }
    if let Some(s) = &raw.strategy {
        sim.strategy = s.parse::<Strategy>().map_err(|e| CliError::config("strategy", e.to_string()))?;
    }
    sim.record_times = raw.record_times.clone().unwrap_or_else(|| vec![t_end]);
    sim.saturation = raw.saturation.unwrap_or(DEFAULT_SATURATION);

    let spec = preset_with(&sim.model, &PresetOptions { saturation: sim.saturation }).map_err(|e| match e {
        cmkv_core::Error::UnknownPreset(_) => CliError::config("model", e.to_string()),
        other => map_core("", other),
    })?;

    if raw.h.is_none() || raw.epsilon.is_none() {
        if n < 2 {
            return Err(CliError::config("n", "the default schedule needs n >= 2"));
        }
        let point = schedule(n as f64, spec.d(), settings.r, settings.c).map_err(|e| map_core("schedule.", e))?;
        sim.h = point.h;
        sim.epsilon = point.epsilon;
    }
    if let Some(h) = raw.h {
        sim.h = h;
    }
    if let Some(eps) = raw.epsilon {
        sim.epsilon = eps;
    }
    if !(settings.r > 0.0 && settings.r < 1.0) {
        return Err(CliError::config("schedule.r", "must lie in (0, 1)"));
    }
    if !(settings.c > 0.0 && settings.c.is_finite()) {
        return Err(CliError::config("schedule.C", "must be positive and finite"));
    }
    sim.validate().map_err(|e| map_core("", e))?;
    Ok(RunConfig { sim, schedule: settings })
}

impl RunConfig {
    /// Every key spelled out, so the file alone reproduces the run.
    pub fn to_raw(&self) -> RawConfig {
        let s = &self.sim;
        RawConfig {
            model: Some(s.model.clone()),
            n: Some(s.n),
            t_end: Some(s.t_end),
            dt: Some(s.dt),
            h: Some(s.h),
            epsilon: Some(s.epsilon),
            seed: Some(s.seed),
            kernel: Some(s.kernel.to_string()),
            strategy: Some(s.strategy.to_string()),
            record_times: Some(s.record_times.clone()),
            saturation: Some(s.saturation),
            schedule: Some(RawSchedule { r: Some(self.schedule.r), c: Some(self.schedule.c) }),
            sweep: None,
        }
    }

    pub fn emit(&self) -> String {
        emit_raw(&self.to_raw())
    }

    /// SHA-256 of the canonical emitted form, hex encoded.
    pub fn digest(&self) -> String {
        hex_sha256(self.emit().as_bytes())
    }
}

pub fn emit_raw(raw: &RawConfig) -> String {
    toml::to_string(raw).expect("config values are always representable")
}

pub fn hex_sha256(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn resolve_plan(base: RawConfig, sweep: RawSweep) -> Result<ExperimentPlan> {
    let mut axes = Vec::new();
    if let Some(v) = &sweep.n {
        axes.push(SweepAxis::N(v.clone()));
    }
    if let Some(v) = &sweep.h {
        axes.push(SweepAxis::H(v.clone()));
    }
    if let Some(v) = &sweep.epsilon {
        axes.push(SweepAxis::Epsilon(v.clone()));
    }
    if let Some(v) = &sweep.dt {
        axes.push(SweepAxis::Dt(v.clone()));
    }
    if let Some(v) = &sweep.seed {
        axes.push(SweepAxis::Seed(v.clone()));
    }
    for axis in &axes {
        if axis.is_empty() {
            return Err(CliError::config(format!("sweep.{}", axis.name()), "axis has no values"));
        }
    }
    let auto_schedule = sweep.auto_schedule.unwrap_or(false);
    if auto_schedule && (sweep.h.is_some() || sweep.epsilon.is_some()) {
        return Err(CliError::config("sweep.auto_schedule", "conflicts with an h or epsilon axis"));
    }
    let comparisons = sweep
        .comparisons
        .clone()
        .unwrap_or_else(|| vec!["oracle".to_string()])
        .iter()
        .map(|c| match c.as_str() {
            "oracle" => Ok(Comparison::Oracle),
            "n" => Ok(Comparison::LargestN),
            other => Err(CliError::config("sweep.comparisons", format!("unknown comparison `{other}`"))),
        })
        .collect::<Result<Vec<_>>>()?;
    let max_runs = sweep.max_runs.unwrap_or(DEFAULT_MAX_RUNS);
    let size = axes.iter().try_fold(1usize, |acc, a| acc.checked_mul(a.len())).unwrap_or(usize::MAX);
    if size > max_runs {
        return Err(CliError::config("sweep.max_runs", format!("{size} runs exceed the cap of {max_runs}")));
    }
    let bins = sweep.bins.unwrap_or(DEFAULT_BINS);
    if bins == 0 {
        return Err(CliError::config("sweep.bins", "must be at least 1"));
    }
    let oracle_copies = sweep.oracle_copies.unwrap_or(DEFAULT_ORACLE_COPIES);
    if oracle_copies == 0 {
        return Err(CliError::config("sweep.oracle_copies", "must be at least 1"));
    }
    let oracle_seed = sweep.oracle_seed.unwrap_or(DEFAULT_ORACLE_SEED);
    if oracle_seed > i64::MAX as u64 {
        return Err(CliError::config("sweep.oracle_seed", "must be below 2^63"));
    }

    let mut cells = Vec::with_capacity(size);
    let mut index = vec![0usize; axes.len()];
    for id in 0..size {
        let mut raw = base.clone();
        for (axis, &i) in axes.iter().zip(&index) {
            axis.apply(i, &mut raw);
        }
        if auto_schedule {
            raw.h = None;
            raw.epsilon = None;
        }
        let config = resolve_run(&raw).map_err(|e| match e {
            CliError::Config { key, message } => CliError::config(key, format!("in sweep cell {id}: {message}")),
            other => other,
        })?;
        cells.push(Cell { id, config });
        for k in (0..axes.len()).rev() {
            index[k] += 1;
            if index[k] < axes[k].len() {
                break;
            }
            index[k] = 0;
        }
    }
    let spec_blocks = cells
        .first()
        .map(|c| preset_with(&c.config.sim.model, &PresetOptions { saturation: c.config.sim.saturation }))
        .transpose()?
        .map_or(0, |m| m.m());
    let block = sweep.block.unwrap_or(0);
    if block >= spec_blocks {
        return Err(CliError::config("sweep.block", format!("the model has {spec_blocks} blocks")));
    }
    Ok(ExperimentPlan {
        base,
        axes,
        auto_schedule,
        comparisons,
        oracle_copies,
        oracle_seed,
        bins,
        block,
        max_runs,
        cells,
    })
}

impl ExperimentPlan {
    pub fn to_raw(&self) -> RawConfig {
        let mut raw = self.base.clone();
        let mut sweep = RawSweep {
            auto_schedule: Some(self.auto_schedule),
            comparisons: Some(self.comparisons.iter().map(|c| c.as_str().to_string()).collect()),
            oracle_copies: Some(self.oracle_copies),
            oracle_seed: Some(self.oracle_seed),
            bins: Some(self.bins),
            block: Some(self.block),
            max_runs: Some(self.max_runs),
            ..RawSweep::default()
        };
        for axis in &self.axes {
            match axis {
                SweepAxis::N(v) => sweep.n = Some(v.clone()),
                SweepAxis::H(v) => sweep.h = Some(v.clone()),
                SweepAxis::Epsilon(v) => sweep.epsilon = Some(v.clone()),
                SweepAxis::Dt(v) => sweep.dt = Some(v.clone()),
                SweepAxis::Seed(v) => sweep.seed = Some(v.clone()),
            }
        }
        raw.sweep = Some(sweep);
        raw
    }

    pub fn emit(&self) -> String {
        emit_raw(&self.to_raw())
    }

    pub fn digest(&self) -> String {
        hex_sha256(self.emit().as_bytes())
    }

    pub fn has_axis(&self, name: &str) -> bool {
        self.axes.iter().any(|a| a.name() == name)
    }
}
