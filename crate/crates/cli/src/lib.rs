//! Scenario runner for the qdswitch toolkit: strict JSON configuration,
//! one scenario per reproduced figure, CSV/JSON outputs with a hashed
//! manifest and optional SVG plots.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod fit;
pub mod manifest;
pub mod scenarios;
pub mod svg;

pub use config::Config;
pub use manifest::{FileEntry, Manifest};
pub use scenarios::{list_scenarios, run_scenario, SCENARIOS};

/// Failure classes, each with its own process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("simulation failed: {0}")]
    Simulation(#[from] qdswitch::Error),
    #[error("filesystem error: {0}")]
    Fs(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Simulation(_) => 3,
            CliError::Fs(_) => 4,
        }
    }
}

/// Sizes the global rayon pool from `QDSWITCH_WORKERS` when it is set.
pub fn init_workers() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("QDSWITCH_WORKERS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::Config(format!("QDSWITCH_WORKERS must be a positive integer, got `{raw}`")))?;
    // a second initialisation (e.g. in tests) keeps the first pool
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}
