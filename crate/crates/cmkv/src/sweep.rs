//! Expanding and running an [`ExperimentPlan`].

use std::collections::BTreeMap;

use cmkv_core::divergences::{histogram_tv_samples, Axis, HistogramGrid, Overflow};
use cmkv_core::models::{preset_with, PresetOptions};
use cmkv_core::simulate::{run_model, run_oracle};
use cmkv_core::{Error, Executor, SimConfig, Trajectory};

use crate::config::{Cell, Comparison, ExperimentPlan, RunConfig};
use crate::error::{CliError, Result};
use crate::output::{results_csv, OutputDir, ResultRow};
use crate::plot::{render, Chart, Series};
use crate::report::{report_convergence, summary_csv, ConvergenceSummary, TV_METRIC};
use crate::run::{row, summary_rows};
use crate::snapshot::{content_hash, digest_bytes, encode, Snapshot};

pub const PLAN_FILE: &str = "plan.toml";
pub const RESULTS_FILE: &str = "results.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const PLOT_FILE: &str = "tv_vs_n.svg";
pub const TV_VS_LARGEST_N: &str = "histogram_tv_largest_n";

pub fn run_id(cell: &Cell) -> String {
    format!("cell-{:05}", cell.id)
}

fn cell_snapshot(cell: &Cell) -> String {
    format!("cells/{}.bin", run_id(cell))
}

/// The oracle reference shared by cells with the same time grid.
struct Reference {
    hash: String,
    samples: Vec<f64>,
    grid: HistogramGrid,
}

#[derive(Debug)]
pub struct SweepOutcome {
    pub rows: Vec<ResultRow>,
    /// Present when the plan compares against the oracle and the results
    /// support a summary.
    pub summary: Option<ConvergenceSummary>,
    /// Why no summary was produced, if one was attempted.
    pub summary_note: Option<String>,
}

/// Grid of `bins` cells spanning `samples`; out-of-range values are clamped
/// into the edge bins.
pub fn shared_grid(samples: &[f64], bins: usize) -> Result<HistogramGrid> {
    let (lo, hi) = samples.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    if !lo.is_finite() || !hi.is_finite() {
        return Err(CliError::Failed("reference sample is empty or not finite".into()));
    }
    let hi = if hi > lo { hi } else { lo + 1.0 };
    Ok(HistogramGrid::new(vec![Axis::new(lo, hi, bins)?], Overflow::Clamp)?)
}

fn time_key(sim: &SimConfig) -> (u64, u64) {
    (sim.dt.to_bits(), sim.t_end.to_bits())
}

/// Runs every cell of `plan`, writing `plan.toml`, per-cell snapshots,
/// oracle references, `results.csv` and, when possible, `summary.csv` and a
/// plot. Cells that fail are recorded with their status and the sweep goes on.
pub fn sweep<E: Executor>(plan: &ExperimentPlan, out: &OutputDir, exec: &E) -> Result<SweepOutcome> {
    for name in [PLAN_FILE, RESULTS_FILE, SUMMARY_FILE, PLOT_FILE] {
        out.check_free(name)?;
    }
    let plan_digest = plan.digest();
    out.write(PLAN_FILE, plan.emit().as_bytes())?;
    let Some(first) = plan.cells.first() else {
        return Err(CliError::config("sweep", "the plan has no cells"));
    };
    let model = preset_with(&first.config.sim.model, &PresetOptions { saturation: first.config.sim.saturation })?;
    let block = plan.block;

    let mut references: BTreeMap<(u64, u64), Reference> = BTreeMap::new();
    if plan.comparisons.contains(&Comparison::Oracle) {
        for cell in &plan.cells {
            let key = time_key(&cell.config.sim);
            if references.contains_key(&key) {
                continue;
            }
            let mut sim = cell.config.sim.clone();
            sim.seed = plan.oracle_seed;
            sim.record_times = vec![];
            let traj = run_oracle(&model, plan.oracle_copies, &sim, exec)?;
            let name = format!("oracle/reference_{:02}.bin", references.len());
            let bytes = encode(&Snapshot {
                ensemble: traj.final_state.clone(),
                seed: plan.oracle_seed,
                config_digest: digest_bytes(&plan_digest)?,
            });
            out.write(&name, &bytes)?;
            let samples = traj.final_state.marginal(block, 0);
            let grid = shared_grid(&samples, plan.bins)?;
            references.insert(key, Reference { hash: content_hash(&bytes), samples, grid });
        }
    }

    let outcomes: Vec<std::result::Result<Trajectory, Error>> =
        exec.map(plan.cells.len(), |i| run_model(&model, &plan.cells[i].config.sim, exec));

    let mut hashes = Vec::with_capacity(plan.cells.len());
    for (cell, outcome) in plan.cells.iter().zip(&outcomes) {
        let hash = match outcome {
            Ok(traj) => {
                let bytes = encode(&Snapshot {
                    ensemble: traj.final_state.clone(),
                    seed: cell.config.sim.seed,
                    config_digest: digest_bytes(&cell.config.digest())?,
                });
                out.write(&cell_snapshot(cell), &bytes)?;
                content_hash(&bytes)
            }
            Err(_) => String::new(),
        };
        hashes.push(hash);
    }

    let largest_n = plan.comparisons.contains(&Comparison::LargestN).then(|| largest_n_partners(plan));
    let mut rows = Vec::new();
    for (i, (cell, outcome)) in plan.cells.iter().zip(&outcomes).enumerate() {
        let config = &cell.config;
        let digest = config.digest();
        let id = run_id(cell);
        let traj = match outcome {
            Ok(t) => t,
            Err(e) => {
                let status = if matches!(e, Error::SimulationDiverged { .. }) { "diverged" } else { "error" };
                rows.push(row(
                    config,
                    &id,
                    model.m(),
                    model.d(),
                    "status".into(),
                    f64::NAN,
                    &format!("{status}: {e}"),
                    &digest,
                    "",
                    "",
                ));
                continue;
            }
        };
        let marginal = traj.final_state.marginal(block, 0);
        if let Some(reference) = references.get(&time_key(&config.sim)) {
            let tv = histogram_tv_samples(&marginal, &reference.samples, &reference.grid)?;
            rows.push(row(config, &id, model.m(), model.d(), TV_METRIC.into(), tv, "ok", &digest, &hashes[i], &reference.hash));
        }
        if let Some(partners) = &largest_n {
            let p = partners[i];
            if let Ok(other) = &outcomes[p] {
                let theirs = other.final_state.marginal(block, 0);
                let grid = shared_grid(&theirs, plan.bins)?;
                let tv = histogram_tv_samples(&marginal, &theirs, &grid)?;
                rows.push(row(config, &id, model.m(), model.d(), TV_VS_LARGEST_N.into(), tv, "ok", &digest, &hashes[i], &hashes[p]));
            }
        }
        rows.extend(summary_rows(traj, config, &id, &digest, &hashes[i]));
    }
    out.write(RESULTS_FILE, &results_csv(&rows)?)?;

    let mut summary = None;
    let mut summary_note = None;
    if plan.comparisons.contains(&Comparison::Oracle) {
        let schedule = first.config.schedule;
        match report_convergence(&rows, TV_METRIC, schedule.r, model.d()) {
            Ok(s) => {
                out.write(SUMMARY_FILE, &summary_csv(&s, schedule.c)?)?;
                if let Some(svg) = tv_plot(&s) {
                    // A plot is a convenience; failing to write it is not an error.
                    if let Err(e) = out.write(PLOT_FILE, svg.as_bytes()) {
                        eprintln!("warning: plot not written: {e}");
                    }
                }
                summary = Some(s);
            }
            Err(e) => summary_note = Some(e.to_string()),
        }
    }
    Ok(SweepOutcome { rows, summary, summary_note })
}

/// For each cell, the index of the cell with the largest `n` among those
/// sharing all other axis values.
fn largest_n_partners(plan: &ExperimentPlan) -> Vec<usize> {
    let key = |c: &RunConfig| {
        let s = &c.sim;
        (s.h.to_bits(), s.epsilon.to_bits(), s.dt.to_bits(), s.seed)
    };
    let auto = plan.auto_schedule || plan.base.h.is_none() || plan.base.epsilon.is_none();
    let group_key = |c: &RunConfig| {
        let (h, e, dt, seed) = key(c);
        // Scheduled bandwidths change with n, so they do not identify a group.
        if auto {
            (0, 0, dt, seed)
        } else {
            (h, e, dt, seed)
        }
    };
    let mut best: BTreeMap<(u64, u64, u64, u64), usize> = BTreeMap::new();
    for (i, cell) in plan.cells.iter().enumerate() {
        let k = group_key(&cell.config);
        let entry = best.entry(k).or_insert(i);
        if cell.config.sim.n > plan.cells[*entry].config.sim.n {
            *entry = i;
        }
    }
    plan.cells.iter().map(|c| best[&group_key(&c.config)]).collect()
}

pub fn tv_plot(s: &ConvergenceSummary) -> Option<String> {
    let points: Vec<(f64, f64)> = s.points.iter().map(|p| (p.n as f64, p.mean)).collect();
    let fitted: Vec<(f64, f64)> = s.points.iter().map(|p| (p.n as f64, s.fitted(p.n))).collect();
    render(&Chart {
        title: "Histogram TV to the oracle",
        x_label: "n",
        y_label: "mean TV over seeds",
        log_x: true,
        log_y: false,
        series: vec![
            Series { label: "particles", points, errors: s.points.iter().map(|p| p.std_error).collect(), dashed: false },
            Series { label: "c (ln n)^-a", points: fitted, errors: vec![], dashed: true },
        ],
    })
}
