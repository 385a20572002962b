//! `collapse-radiance`: spectra, comparisons, α bands, Z-surveys, synthetic
//! data and correlation-length fits from the command line.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::Settings;

#[derive(Debug, Parser)]
#[command(
    name = "collapse-radiance",
    version,
    about = "Spontaneous radiation of atoms under CSL and Diosi-Penrose collapse models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Rate spectrum dΓ/dE of one model.
    Spectrum(Run),
    /// Normalized shapes of a model and a reference model, their ratio and
    /// the convergence energy.
    Compare(Run),
    /// Pointwise envelope of the rate over a range of α.
    Band(Run),
    /// Rate and cancellation factor of several atoms at one energy.
    Zsurvey(Run),
    /// Poisson counts for a binned detector.
    Synth(Run),
    /// Amplitude and correlation length from a synthetic spectrum.
    Fit(Run),
}

#[derive(Debug, Args)]
struct Run {
    /// TOML config file, or a previous output whose echoed config is reused.
    /// Flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file [default: standard output].
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    settings: Settings,
}

#[derive(Debug)]
pub enum CliError {
    /// Bad or missing input: exit code 2.
    Usage(String),
    /// Failure while computing or writing: exit code 1.
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Runtime(e)
    }
}

impl From<collapse_radiance::Error> for CliError {
    fn from(e: collapse_radiance::Error) -> Self {
        CliError::Runtime(e.into())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.into())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, run) = match cli.command {
        Command::Spectrum(r) => ("spectrum", r),
        Command::Compare(r) => ("compare", r),
        Command::Band(r) => ("band", r),
        Command::Zsurvey(r) => ("zsurvey", r),
        Command::Synth(r) => ("synth", r),
        Command::Fit(r) => ("fit", r),
    };
    let result = run
        .config
        .as_deref()
        .map(config::load_config)
        .transpose()
        .and_then(|cfg| config::merge(name, &run.settings, cfg))
        .and_then(|settings| commands::execute(name, settings, run.out.as_deref()));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
