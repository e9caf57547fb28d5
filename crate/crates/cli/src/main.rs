//! `gsqg`: batch front end of the gSQG V-state library.

mod commands;
mod config;
mod error;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::{load, ConstantsConfig, PointVortexRunConfig, RunConfig, ValidateConfig, VstateConfig};
use crate::error::CliError;
use crate::output::{Header, Sink};

/// Seed of the randomized checks when `--seed` is absent.
const DEFAULT_SEED: u64 = 20_240_601;
const THREADS_VAR: &str = "GSQG_NUM_THREADS";

#[derive(Debug, Parser)]
#[command(name = "gsqg", version, about = "Desingularize gSQG point-vortex equilibria into vortex-patch V-states")]
struct Cli {
    /// JSON run configuration; built-in defaults when absent.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    out: PathBuf,
    /// Seed of the randomized sweeps, recorded in every output header.
    #[arg(long, global = true, value_name = "N", default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Suppress the summary on stdout.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Kernel constants and spectral coefficients with a quadrature cross-check.
    Constants,
    /// Canonical point-vortex equilibrium and its non-degeneracy report.
    Pointvortex,
    /// Continue an equilibrium into a branch of patch V-states.
    Vstate,
    /// Run the verification suite.
    Validate,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Self::Constants => "constants",
            Self::Pointvortex => "pointvortex",
            Self::Vstate => "vstate",
            Self::Validate => "validate",
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("{THREADS_VAR} must be a positive integer, got '{value}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Config(format!("{THREADS_VAR}: {e}")))
}

fn prepare<C: RunConfig>(cli: &Cli) -> Result<(C, Sink), CliError> {
    let config: C = load(cli.config.as_deref())?;
    let header = Header::new(cli.command.name(), &config, cli.seed)?;
    let sink = Sink::new(Path::new(&cli.out), header, cli.quiet)?;
    Ok((config, sink))
}

fn run(cli: &Cli) -> Result<(), CliError> {
    configure_threads()?;
    match cli.command {
        Command::Constants => {
            let (config, sink) = prepare::<ConstantsConfig>(cli)?;
            commands::constants::run(&config, &sink)
        }
        Command::Pointvortex => {
            let (config, sink) = prepare::<PointVortexRunConfig>(cli)?;
            commands::pointvortex::run(&config, &sink)
        }
        Command::Vstate => {
            let (config, sink) = prepare::<VstateConfig>(cli)?;
            commands::vstate::run(&config, cli.seed, &sink)
        }
        Command::Validate => {
            let (config, sink) = prepare::<ValidateConfig>(cli)?;
            commands::validate::run(&config, cli.seed, &sink)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("gsqg {}: {e}", cli.command.name());
            e.exit_code()
        }
    }
}
