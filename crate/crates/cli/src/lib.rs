//! Command-line front end for `ridgepca`: analytic sweeps, Monte Carlo
//! verification and factor-4 bound certification.
//!
//! Exit codes: 0 success, 1 verification or bound failure, 2 configuration
//! error, 3 output I/O error.

pub mod commands;
pub mod config;
pub mod plot;
pub mod table;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use commands::{certify, sweep, verify, verify_with_oracle, CertifyReport, CliError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    Failure = 1,
    ConfigError = 2,
    IoError = 3,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }
}

#[derive(Debug, Parser)]
#[command(name = "ridgepca", version, about = "Ridge vs PCA-OLS risk in the fixed-design linear model")]
pub struct Cli {
    /// Output file (CSV for sweep/verify, report text for certify); stdout if absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Write an SVG plot of the risk curves.
    #[arg(long, global = true)]
    pub plot: Option<PathBuf>,
    /// Override every seed in the config (synthesis, Monte Carlo, battery).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Analytic ridge and PCA-OLS risks over the lambda grid.
    Sweep { config: PathBuf },
    /// Analytic sweep plus Monte Carlo estimates of both risks.
    Verify { config: PathBuf },
    /// Check the factor-4 inflation bound over the grid and/or the built-in battery.
    Certify {
        config: Option<PathBuf>,
        /// Also certify the built-in scenario battery.
        #[arg(long)]
        battery: bool,
    },
}

#[derive(Debug, Clone, Default)]
pub struct Options {
    pub out: Option<PathBuf>,
    pub plot: Option<PathBuf>,
    pub seed: Option<u64>,
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitStatus::ConfigError.code()
            } else {
                ExitStatus::Success.code()
            };
        }
    };
    let opts = Options {
        out: cli.out,
        plot: cli.plot,
        seed: cli.seed,
    };
    let result = match &cli.command {
        Command::Sweep { config } => sweep(config, &opts),
        Command::Verify { config } => verify(config, &opts),
        Command::Certify { config, battery } => certify(config.as_deref(), *battery, &opts),
    };
    match result {
        Ok(status) => status.code(),
        Err(e) => {
            eprintln!("error: {e}");
            e.status().code()
        }
    }
}
