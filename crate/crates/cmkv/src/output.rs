//! Output directories and the tidy results CSV.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// A directory whose files are never overwritten unless `force` is set.
#[derive(Debug, Clone)]
pub struct OutputDir {
    root: PathBuf,
    force: bool,
}

impl OutputDir {
    pub fn create(root: impl Into<PathBuf>, force: bool) -> Result<Self> {
        let root = root.into();
        std::fs::create_dir_all(&root).map_err(|e| CliError::io(&root, e))?;
        Ok(Self { root, force })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    /// Fails if `name` exists and overwriting is not allowed.
    pub fn check_free(&self, name: &str) -> Result<()> {
        let path = self.path(name);
        if !self.force && path.exists() {
            return Err(CliError::Exists(path));
        }
        Ok(())
    }

    pub fn write(&self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        self.check_free(name)?;
        let path = self.path(name);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
        }
        std::fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }
}

/// One row of the long-form results table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub run_id: String,
    pub model: String,
    pub n: usize,
    pub m: usize,
    pub d: usize,
    pub h: f64,
    pub epsilon: f64,
    pub dt: f64,
    #[serde(rename = "T")]
    pub t_end: f64,
    pub seed: u64,
    pub metric_name: String,
    pub metric_value: f64,
    pub status: String,
    pub config_digest: String,
    /// Content hash of the snapshot the metric was computed from.
    pub snapshot_hash: String,
    /// Content hash of the reference snapshot, empty when there is none.
    pub reference_hash: String,
}

pub fn results_csv(rows: &[ResultRow]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    if rows.is_empty() {
        w.write_record([
            "run_id", "model", "n", "m", "d", "h", "epsilon", "dt", "T", "seed", "metric_name", "metric_value",
            "status", "config_digest", "snapshot_hash", "reference_hash",
        ])?;
    }
    w.into_inner().map_err(|e| CliError::Failed(e.to_string()))
}

pub fn read_results(path: &Path) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_path(path)?;
    let rows = r.deserialize().collect::<std::result::Result<Vec<ResultRow>, _>>()?;
    Ok(rows)
}
