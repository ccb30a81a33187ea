//! The `simulate` pipeline: one run, snapshots, diagnostics and results.

use cmkv_core::simulate::{run_with, Trajectory};
use cmkv_core::Executor;

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::output::{results_csv, OutputDir, ResultRow};
use crate::snapshot::{content_hash, digest_bytes, encode, write_csv, Snapshot};

pub const CONFIG_FILE: &str = "config.toml";
pub const FINAL_SNAPSHOT: &str = "final.bin";
pub const DIAGNOSTICS_FILE: &str = "diagnostics.csv";
pub const RESULTS_FILE: &str = "results.csv";

#[derive(Debug, Clone)]
pub struct SimulateOutcome {
    pub trajectory: Trajectory,
    pub config_digest: String,
    pub final_hash: String,
}

pub fn snapshot_name(index: usize) -> String {
    format!("snapshot_{index:03}.bin")
}

/// Runs `config` and writes its files into `out`. No file is touched if any
/// of them already exists and `out` does not allow overwriting.
pub fn simulate<E: Executor>(config: &RunConfig, out: &OutputDir, exec: &E, export_csv: bool) -> Result<SimulateOutcome> {
    let record = config.sim.record_times.len();
    let mut names: Vec<String> = vec![CONFIG_FILE.into(), FINAL_SNAPSHOT.into(), DIAGNOSTICS_FILE.into(), RESULTS_FILE.into()];
    for i in 0..record {
        names.push(snapshot_name(i));
        if export_csv {
            names.push(snapshot_name(i).replace(".bin", ".csv"));
        }
    }
    for name in &names {
        out.check_free(name)?;
    }
    let digest = config.digest();
    out.write(CONFIG_FILE, config.emit().as_bytes())?;

    let trajectory = run_with(&config.sim, exec)?;
    let digest_raw = digest_bytes(&digest)?;
    for (i, (_, ensemble)) in trajectory.snapshots.iter().enumerate() {
        let snap = Snapshot { ensemble: ensemble.clone(), seed: config.sim.seed, config_digest: digest_raw };
        out.write(&snapshot_name(i), &encode(&snap))?;
        if export_csv {
            let mut buf = Vec::new();
            write_csv(ensemble, &mut buf)?;
            out.write(&snapshot_name(i).replace(".bin", ".csv"), &buf)?;
        }
    }
    let final_bytes = encode(&Snapshot {
        ensemble: trajectory.final_state.clone(),
        seed: config.sim.seed,
        config_digest: digest_raw,
    });
    let final_hash = content_hash(&final_bytes);
    out.write(FINAL_SNAPSHOT, &final_bytes)?;
    out.write(DIAGNOSTICS_FILE, &diagnostics_csv(&trajectory, config, &digest, &final_hash)?)?;
    let rows = summary_rows(&trajectory, config, "run", &digest, &final_hash);
    out.write(RESULTS_FILE, &results_csv(&rows)?)?;
    Ok(SimulateOutcome { trajectory, config_digest: digest, final_hash })
}

fn diagnostics_csv(traj: &Trajectory, config: &RunConfig, digest: &str, hash: &str) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["step", "t", "metric_name", "metric_value", "seed", "config_digest", "snapshot_hash"])?;
    let seed = config.sim.seed.to_string();
    for d in &traj.diagnostics {
        let mut emit = |name: String, value: f64| {
            w.write_record([d.step.to_string(), d.t.to_string(), name, value.to_string(), seed.clone(), digest.into(), hash.into()])
        };
        for (j, rate) in d.floor_hit_rates.iter().enumerate() {
            emit(format!("floor_hit_rate[{j}]"), rate.unwrap_or(f64::NAN))?;
        }
        emit("drift_max".into(), d.drift_max)?;
        for (i, m) in d.mean.iter().enumerate() {
            emit(format!("mean[{i}]"), *m)?;
        }
        for (i, v) in d.variance.iter().enumerate() {
            emit(format!("variance[{i}]"), *v)?;
        }
    }
    w.into_inner().map_err(|e| CliError::Failed(e.to_string()))
}

/// Terminal moments and last-step diagnostics as result rows.
pub fn summary_rows(traj: &Trajectory, config: &RunConfig, run_id: &str, digest: &str, hash: &str) -> Vec<ResultRow> {
    let e = &traj.final_state;
    let (mean, var) = cmkv_core::simulate::moments(e);
    let mut metrics: Vec<(String, f64)> = Vec::new();
    for i in 0..mean.len() {
        metrics.push((format!("mean[{i}]"), mean[i]));
        metrics.push((format!("variance[{i}]"), var[i]));
    }
    if let Some(last) = traj.diagnostics.last() {
        for (j, rate) in last.floor_hit_rates.iter().enumerate() {
            metrics.push((format!("floor_hit_rate[{j}]"), rate.unwrap_or(f64::NAN)));
        }
        metrics.push(("drift_max".into(), last.drift_max));
    }
    metrics
        .into_iter()
        .map(|(name, value)| row(config, run_id, e.m(), e.d(), name, value, "ok", digest, hash, ""))
        .collect()
}

#[allow(clippy::too_many_arguments)]
pub fn row(
    config: &RunConfig,
    run_id: &str,
    m: usize,
    d: usize,
    metric_name: String,
    metric_value: f64,
    status: &str,
    digest: &str,
    snapshot_hash: &str,
    reference_hash: &str,
) -> ResultRow {
    let s = &config.sim;
    ResultRow {
        run_id: run_id.into(),
        model: s.model.clone(),
        n: s.n,
        m,
        d,
        h: s.h,
        epsilon: s.epsilon,
        dt: s.dt,
        t_end: s.t_end,
        seed: s.seed,
        metric_name,
        metric_value,
        status: status.into(),
        config_digest: digest.into(),
        snapshot_hash: snapshot_hash.into(),
        reference_hash: reference_hash.into(),
    }
}
