//! Configuration, experiment sweeps and CSV output behind the `smrelay` binary.

mod commands;
mod config;

pub use commands::{
    cmd_diversity_fit, cmd_dmt_theory, cmd_hamiltonian, cmd_outage_sweep, cmd_verify, read_estimates, CheckResult,
    EstimateRow, FitRow, VerifyOptions, VerifyReport, DMT_HEADER, FIT_HEADER, SWEEP_HEADER,
};
pub use config::{parse_gain_list, Regime, SchemeConfig};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Core(#[from] crate::Error),
}

impl CliError {
    /// Process exit code: 2 for configuration and input problems.
    pub fn exit_code(&self) -> i32 {
        2
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
