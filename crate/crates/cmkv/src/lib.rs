//! Command-line harness for `cmkv-core`: TOML configuration, a rayon
//! executor, binary snapshots, experiment sweeps with oracle comparisons,
//! and convergence summaries.

pub mod cli;
pub mod config;
pub mod error;
pub mod exec;
pub mod output;
pub mod plot;
pub mod report;
pub mod run;
pub mod snapshot;
pub mod sweep;

pub use config::{load_config, parse_config, ExperimentPlan, Loaded, Overrides, RunConfig};
pub use error::{CliError, Result};
pub use exec::Pool;
