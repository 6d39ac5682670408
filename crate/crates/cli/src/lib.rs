//! Experiment runner around `mfcap-core`: theory tables, multi-seed
//! simulations, comparisons and survivor-lemma checks driven by one TOML file.

pub mod commands;
pub mod config;
pub mod manifest;
pub mod output;
pub mod stats;
pub mod svg;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use thiserror::Error;

pub use config::RunConfig;
pub use manifest::RunManifest;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("comparison failed: {0}")]
    Comparison(String),
    #[error("runtime error: {0}")]
    Runtime(String),
}

pub type CliResult<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Comparison(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }

    /// Library errors raised while interpreting the configuration.
    pub fn config(e: mfcap_core::Error) -> Self {
        match e {
            mfcap_core::Error::Config(m) | mfcap_core::Error::InvalidArgument(m) => CliError::Config(m),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<mfcap_core::Error> for CliError {
    fn from(e: mfcap_core::Error) -> Self {
        use mfcap_core::Error as E;
        match e {
            E::NotMultifractal | E::Config(_) => CliError::config(e),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "mfcap", version, about = "Cascade capacities under dilation and sparse sampling")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory; overrides `output_dir` from the configuration.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads (speed only; outputs do not depend on it).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Write every survivor set of every seed.
    #[arg(long, global = true)]
    pub dump_survivors: bool,
    /// Write the field and leader values of every analysis level.
    #[arg(long, global = true)]
    pub dump_levels: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Closed-form spectra, phase parameters and oracle table.
    Theory,
    /// Multi-seed simulation of the operator and its empirical spectra.
    Simulate,
    /// Sup-gaps between simulated and predicted spectra.
    Compare,
    /// Covering and crowding checks of the survivor sets.
    CheckLemmas,
    /// Plot-ready tables (and optional SVG charts) from earlier outputs.
    Plotdata,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Theory => "theory",
            Command::Simulate => "simulate",
            Command::Compare => "compare",
            Command::CheckLemmas => "check-lemmas",
            Command::Plotdata => "plotdata",
        }
    }
}

/// Options shared by every subcommand after the configuration is loaded.
#[derive(Clone, Debug)]
pub struct RunOptions {
    pub out: PathBuf,
    pub dump_survivors: bool,
    pub dump_levels: bool,
}

pub fn run(cli: &Cli) -> CliResult<()> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("--config PATH is required".into()))?;
    let loaded = RunConfig::load(path)?;
    let opts = RunOptions {
        out: cli.out.clone().unwrap_or_else(|| loaded.config.output_dir.clone()),
        dump_survivors: cli.dump_survivors,
        dump_levels: cli.dump_levels,
    };
    let job = || match cli.command {
        Command::Theory => commands::theory::run(&loaded, &opts),
        Command::Simulate => commands::simulate::run(&loaded, &opts),
        Command::Compare => commands::compare::run(&loaded, &opts),
        Command::CheckLemmas => commands::lemmas::run(&loaded, &opts),
        Command::Plotdata => commands::plotdata::run(&loaded, &opts),
    };
    match cli.threads {
        Some(0) => Err(CliError::Config("--threads must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Runtime(e.to_string()))?
            .install(job),
        None => job(),
    }
}
