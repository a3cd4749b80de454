//! The `ldg` command-line tool.

pub mod commands;
pub mod config;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use thiserror::Error;

pub use config::{ConfigError, RunConfig};

/// Out-dir fallback when `--out` is absent.
pub const OUT_DIR_ENV: &str = "LDG_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "ldg", version, about = "Landau–de Gennes Q-tensor analysis")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory; falls back to $LDG_OUT_DIR.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Overrides `[solver] seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for the solver.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Overrides `[solver] slack`.
    #[arg(long, global = true)]
    pub slack: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Bulk stationary points over a temperature sweep, as CSV.
    Phase,
    /// Bulk and elastic triangle reports, as JSON.
    Triangles,
    /// Gradient-flow minimization with a bound audit.
    Minimize,
    /// Bound audit of a stored LDGQ1 field.
    Verify { field: PathBuf },
    /// Second moment of a density given as `theta,phi,value` CSV.
    Moments {
        density: PathBuf,
        /// Quadrature refinement level.
        #[arg(long, default_value_t = 8)]
        level: usize,
    },
}

/// Process exit codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExitStatus {
    Ok = 0,
    Io = 1,
    Parse = 2,
    Divergence = 3,
    AuditFailed = 4,
    HypothesisNotMet = 5,
    NotConverged = 6,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{path}: {message}")]
    Input { path: String, message: String },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Bounds(#[from] ldg_core::bounds::BoundsError),
    #[error(transparent)]
    Divergence(ldg_core::solver::SolverError),
}

impl CliError {
    pub fn status(&self) -> ExitStatus {
        match self {
            CliError::Io { .. } => ExitStatus::Io,
            CliError::Divergence(_) => ExitStatus::Divergence,
            _ => ExitStatus::Parse,
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        CliError::Io { path: path.as_ref().display().to_string(), source }
    }
}

/// Runs one invocation, printing its primary output to stdout.
pub fn run(cli: &Cli) -> Result<ExitStatus, CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        // A pool already exists when `run` is called twice in one process.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let out = commands::Output::new(cli.out.clone().or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from)));
    match &cli.command {
        Command::Phase => commands::phase(&load(cli)?, &out),
        Command::Triangles => commands::triangles(&load(cli)?, &out),
        Command::Minimize => commands::minimize(&load(cli)?, &overrides(cli), &out),
        Command::Verify { field } => commands::verify(field, &load(cli)?, &overrides(cli), &out),
        Command::Moments { density, level } => commands::moments(density, *level, &out),
    }
}

fn load(cli: &Cli) -> Result<RunConfig, CliError> {
    let path = cli.config.as_ref().ok_or_else(|| CliError::Usage("this command needs --config".into()))?;
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    RunConfig::parse(&text).map_err(|e| CliError::Input { path: path.display().to_string(), message: e.to_string() })
}

fn overrides(cli: &Cli) -> commands::Overrides {
    commands::Overrides { seed: cli.seed, slack: cli.slack }
}
