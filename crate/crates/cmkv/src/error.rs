use std::path::PathBuf;

use serde::Serialize;

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// A config problem at a dotted key path.
    #[error("{key}: {message}")]
    Config { key: String, message: String },
    #[error(transparent)]
    Core(#[from] cmkv_core::Error),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{} already exists; pass --force to overwrite", .0.display())]
    Exists(PathBuf),
    #[error("snapshot: {0}")]
    Snapshot(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("report: {0}")]
    Report(String),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Config { key: key.into(), message: message.into() }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config { .. } => "config",
            CliError::Core(cmkv_core::Error::InvalidParameter { .. }) => "config",
            CliError::Core(cmkv_core::Error::SimulationDiverged { .. }) => "diverged",
            CliError::Core(_) => "numerics",
            CliError::Io { .. } | CliError::Exists(_) => "io",
            CliError::Snapshot(_) => "snapshot",
            CliError::Csv(_) => "csv",
            CliError::Report(_) => "report",
            CliError::Usage(_) => "usage",
            CliError::Failed(_) => "failed",
        }
    }

    /// The offending config key, when there is one.
    pub fn key(&self) -> Option<&str> {
        match self {
            CliError::Config { key, .. } => Some(key),
            CliError::Core(cmkv_core::Error::InvalidParameter { name, .. }) => Some(name),
            _ => None,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind() {
            "config" | "usage" => 2,
            "diverged" => 3,
            _ => 1,
        }
    }

    /// One-line JSON description for stderr.
    pub fn json_line(&self) -> String {
        #[derive(Serialize)]
        struct Line<'a> {
            error: &'a str,
            #[serde(skip_serializing_if = "Option::is_none")]
            key: Option<&'a str>,
            message: String,
        }
        let line = Line { error: self.kind(), key: self.key(), message: self.to_string() };
        serde_json::to_string(&line).unwrap_or_else(|_| format!("{{\"error\":\"{}\"}}", self.kind()))
    }
}
