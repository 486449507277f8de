//! Batch front end for `semilinear-core`.

pub mod commands;
pub mod config;
pub mod output;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use thiserror::Error;

pub use config::RunConfig;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("{}:{line}: {message}", path.display())]
    Csv {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error(transparent)]
    Core(#[from] semilinear_core::Error),

    #[error("serializing report: {0}")]
    Json(#[source] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } | CliError::Json(_) => 1,
            CliError::Config { .. } | CliError::Csv { .. } | CliError::Core(_) => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "semilinear",
    version,
    about = "Radial standing waves by charge-constrained minimization"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Run configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Output directory; ./out is created when missing, any other path must exist.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Overrides the configured seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    #[arg(long, global = true)]
    pub quiet: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Check the hypotheses on the potential.
    Check,
    /// Minimize the energy at the configured charges.
    Solve,
    /// Solve along a ray of scaled charges.
    Scan,
    /// Tabulate hylomorphy margins of plateau profiles.
    Hylomorphy,
    /// Compare a profile with its symmetric-decreasing rearrangement.
    Rearrange,
}

/// Exit code when `check` finds a failing hypothesis.
pub const EXIT_CHECK_FAILED: i32 = 3;

/// Runs one subcommand and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli) -> Result<i32, CliError> {
    let config_path = cli.config.clone().ok_or_else(|| CliError::Config {
        line: 0,
        message: "--config is required".into(),
    })?;
    let text = std::fs::read_to_string(&config_path).map_err(|source| CliError::Io {
        path: config_path.clone(),
        source,
    })?;
    let mut cfg = RunConfig::parse(&text)?;
    if let Some(seed) = cli.seed {
        cfg.solver.seed = seed;
    }
    let base = config_path.parent().map(PathBuf::from).unwrap_or_default();
    let out = match &cli.out {
        Some(dir) => {
            if !dir.is_dir() {
                return Err(CliError::Io {
                    path: dir.clone(),
                    source: std::io::Error::new(
                        std::io::ErrorKind::NotFound,
                        "output directory does not exist",
                    ),
                });
            }
            dir.clone()
        }
        None => {
            let dir = PathBuf::from("out");
            std::fs::create_dir_all(&dir).map_err(|source| CliError::Io {
                path: dir.clone(),
                source,
            })?;
            dir
        }
    };
    let ctx = commands::Context {
        cfg,
        base,
        out,
        quiet: cli.quiet,
    };
    match cli.command {
        Command::Check => commands::check(&ctx),
        Command::Solve => commands::solve(&ctx),
        Command::Scan => commands::scan(&ctx),
        Command::Hylomorphy => commands::hylomorphy(&ctx),
        Command::Rearrange => commands::rearrange(&ctx),
    }
}
