use std::fmt;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;
mod selftest;
mod svg;

use config::Config;

/// Steady-state PLE spectra of a dipole-coupled emitter pair.
#[derive(Parser, Debug)]
#[command(name = "pairple", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// CSV of theta, gamma12, omega12.
    Couplings {
        #[arg(long)]
        config: PathBuf,
        /// Sweep theta over N points instead of using the configured angle.
        #[arg(long, value_name = "N")]
        theta_sweep: Option<usize>,
    },
    /// Steady-state density matrix (product and collective basis) and residual.
    Steady {
        #[arg(long)]
        config: PathBuf,
        /// Laser detuning; defaults to `detuning_min` from the config.
        #[arg(long, allow_hyphen_values = true)]
        detuning: Option<f64>,
        /// Also integrate the master equation and report the deviation.
        #[arg(long)]
        oracle: bool,
    },
    /// PLE spectrum over the configured detuning grid, plus the peak table.
    Ple {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_name = "FILE")]
        svg: Option<PathBuf>,
        /// Write the peak table here instead of after the spectrum.
        #[arg(long, value_name = "FILE")]
        peaks: Option<PathBuf>,
    },
    /// Intensity surface over polarization angle and detuning, plus the side-peak trail.
    Polscan {
        #[arg(long)]
        config: PathBuf,
        /// Write the trail table here instead of after the surface.
        #[arg(long, value_name = "FILE")]
        trail: Option<PathBuf>,
    },
    /// Cross-check independent code paths and report pass/fail.
    Selftest,
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Solver(pairple::Error),
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Solver(_) | CliError::Io(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "invalid configuration: {m}"),
            CliError::Solver(e) => write!(f, "solver error: {e}"),
            CliError::Io(m) => write!(f, "{m}"),
        }
    }
}

impl From<pairple::Error> for CliError {
    fn from(e: pairple::Error) -> Self {
        CliError::Solver(e)
    }
}

fn dispatch(cmd: Command, out: &mut impl Write) -> Result<(), CliError> {
    match cmd {
        Command::Couplings {
            config,
            theta_sweep,
        } => commands::couplings(&Config::load(&config)?, theta_sweep, out),
        Command::Steady {
            config,
            detuning,
            oracle,
        } => commands::steady(&Config::load(&config)?, detuning, oracle, out),
        Command::Ple { config, svg, peaks } => {
            commands::ple(&Config::load(&config)?, svg.as_deref(), peaks.as_deref(), out)
        }
        Command::Polscan { config, trail } => {
            commands::polscan(&Config::load(&config)?, trail.as_deref(), out)
        }
        Command::Selftest => match selftest::run(out) {
            Ok(true) => Ok(()),
            Ok(false) => Err(CliError::Io("selftest failed".into())),
            Err(e) => Err(CliError::Io(e.to_string())),
        },
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let result = dispatch(cli.command, &mut out);
    let flushed = out.flush();
    match (result, flushed) {
        (Ok(()), Ok(())) => ExitCode::SUCCESS,
        (Err(e), _) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
        (Ok(()), Err(e)) => {
            eprintln!("error: cannot write output: {e}");
            ExitCode::from(2)
        }
    }
}
