//! Command-line front end for the range-based initializer: synthesized runs,
//! RMSE sweeps, oracle comparisons and replay of recorded logs.

pub mod commands;
pub mod config;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rbinit_sim::SimError;
use thiserror::Error;

pub use commands::{execute, Report};
pub use config::RunConfig;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        if e.is_config() {
            CliError::Config(e.to_string())
        } else {
            CliError::Runtime(e.to_string())
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "rbinit", version, about = "Initial pose of a dead-reckoning agent from range measurements")]
pub struct Cli {
    #[command(flatten)]
    pub overrides: Overrides,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Synthesize one realization and write its trace, snapshots and log.
    Simulate,
    /// Position RMSE per ranging event over realizations and granularities.
    RmseSweep,
    /// Run a recorded JSON-lines measurement log through the filter.
    Replay { log: PathBuf },
    /// Compare against a bootstrap particle filter on shared streams.
    OracleCompare,
    /// Print the effective configuration as TOML.
    DumpConfig,
}

/// Flags that override the config file.
#[derive(Debug, Default, Args)]
pub struct Overrides {
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Scenario JSON file.
    #[arg(long, global = true)]
    pub scenario: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub realizations: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Comma-separated bearing/heading granularities, degrees.
    #[arg(long, global = true, value_delimiter = ',')]
    pub granularity_deg: Option<Vec<f64>>,
    #[arg(long, global = true)]
    pub gamma: Option<f64>,
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    /// Range-likelihood scale, meters.
    #[arg(long, global = true)]
    pub sigma: Option<f64>,
    /// Termination bounds m²,m²,m²,deg².
    #[arg(long, global = true, value_delimiter = ',', num_args = 1)]
    pub gamma_cov: Option<Vec<f64>>,
    #[arg(long, global = true)]
    pub oracle_particles: Option<usize>,
    /// Remove dead-reckoning noise from the scenario.
    #[arg(long, global = true)]
    pub exact_dr: bool,
}

impl Overrides {
    /// Config file (or defaults) with the flags applied on top.
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut c = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(v) = &self.scenario {
            c.scenario = Some(v.clone());
        }
        if let Some(v) = self.seed {
            c.seed = v;
        }
        if let Some(v) = self.realizations {
            c.realizations = Some(v);
        }
        if let Some(v) = &self.out {
            c.out = v.clone();
        }
        if let Some(v) = &self.granularity_deg {
            c.granularity_deg = Some(v.clone());
        }
        if let Some(v) = self.gamma {
            c.gamma = v;
        }
        if let Some(v) = self.alpha {
            c.alpha = v;
        }
        if let Some(v) = self.sigma {
            c.sigma = v;
        }
        if let Some(v) = &self.gamma_cov {
            c.gamma_cov = v
                .as_slice()
                .try_into()
                .map_err(|_| CliError::Config(format!("--gamma-cov takes 4 values, got {}", v.len())))?;
        }
        if let Some(v) = self.oracle_particles {
            c.oracle_particles = v;
        }
        c.exact_dead_reckoning |= self.exact_dr;
        c.validate()?;
        Ok(c)
    }
}
