//! Experiment harness for the updown SMC library: variance against `M` at
//! fixed `MN`, RMSE against `N` with an importance-sampling baseline, and
//! per-position segment profiles. Results are long-format CSV files with a
//! `run.json` sidecar.

pub mod config;
pub mod experiments;
pub mod models;
pub mod output;

use thiserror::Error;

pub use config::{ExperimentConfig, ModelKind};
pub use experiments::{
    gen_tables, run_convergence_experiment, run_segment_profile, run_variance_experiment, ConvergeOutcome,
    ProfileOutcome, VarianceOutcome,
};

/// Version of the CSV layouts written by this crate.
pub const CSV_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("no ground truth available: {0}")]
    OracleUnavailable(String),
    #[error("all runs died: {0}")]
    AllDied(String),
    #[error("run failed: {0}")]
    Run(#[from] updown_core::SmcError),
    #[error("output error: {0}")]
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::OracleUnavailable(_) => 2,
            CliError::AllDied(_) => 3,
            CliError::Run(_) | CliError::Output(_) => 1,
        }
    }
}
