//! `starconfine`: verification runs for the confined-particle phase-space
//! model. Every run writes its resolved configuration, its outputs and a
//! manifest of sha256 hashes into the output directory.
//!
//! Exit codes: 0 all checks pass, 1 a check failed, 2 configuration error,
//! 3 numerical error.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use config::{Command, FileConfig, Format, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<starconfine::Error> for CliError {
    fn from(e: starconfine::Error) -> Self {
        use starconfine::Error as E;
        match e {
            E::Config(_)
            | E::Domain(_)
            | E::RegularizationOrder { .. }
            | E::Resolution(_)
            | E::UnsupportedOrder { .. }
            | E::InsufficientOrder { .. } => CliError::Config(e.to_string()),
            E::Io(e) => CliError::Io(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "starconfine", version, about = "Phase-space checks for a particle confined to x < 0")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand, Debug)]
enum Sub {
    /// Naive and confined stargenvalue residuals, F_EE dumps and the boundary condition.
    Stargen(Flags),
    /// Regularized eigenvalues against the box spectrum.
    Spectrum(Flags),
    /// Symmetry form over a state corpus and the deficiency check.
    Selfadjoint(Flags),
    /// Wigner function dumps for eigenstates and supplied states.
    Wigner(Flags),
    /// One-sided delta identities in canonical form.
    Distrib(Flags),
}

#[derive(Args, Debug, Clone, Default)]
struct Flags {
    /// TOML file with any of the flag keys (E, grid_n, x_max, eta, c, L, modes, out, format, k, states).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Energies, comma separated.
    #[arg(long = "E", value_delimiter = ',', allow_negative_numbers = true)]
    energies: Option<Vec<f64>>,
    /// Points on the x axis (matrix size for `spectrum`).
    #[arg(long = "grid-n")]
    grid_n: Option<usize>,
    /// Half-width of the x window.
    #[arg(long = "x-max", allow_negative_numbers = true)]
    x_max: Option<f64>,
    /// Kernel widths, strictly decreasing.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    eta: Option<Vec<f64>>,
    /// Offset ratio eps / eta.
    #[arg(long, allow_negative_numbers = true)]
    c: Option<f64>,
    /// Box length for `spectrum`.
    #[arg(long = "L", allow_negative_numbers = true)]
    l: Option<f64>,
    #[arg(long)]
    modes: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    format: Option<Vec<Format>>,
    /// Deficiency wavenumbers for `selfadjoint`.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    k: Option<Vec<f64>>,
}

impl Flags {
    fn as_file_config(&self) -> FileConfig {
        FileConfig {
            command: None,
            energies: self.energies.clone(),
            grid_n: self.grid_n,
            x_max: self.x_max,
            eta: self.eta.clone(),
            c: self.c,
            l: self.l,
            modes: self.modes,
            out: self.out.clone(),
            format: self.format.clone(),
            k: self.k.clone(),
            states: None,
        }
    }
}

fn init_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("STARCONFINE_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::Config(format!("STARCONFINE_THREADS: expected a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("STARCONFINE_THREADS: {e}")))
}

fn resolve(cli: Cli) -> Result<RunConfig, CliError> {
    let (command, flags) = match cli.command {
        Sub::Stargen(f) => (Command::Stargen, f),
        Sub::Spectrum(f) => (Command::Spectrum, f),
        Sub::Selfadjoint(f) => (Command::Selfadjoint, f),
        Sub::Wigner(f) => (Command::Wigner, f),
        Sub::Distrib(f) => (Command::Distrib, f),
    };
    let file = match &flags.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    RunConfig::resolve(command, file.overlay(flags.as_file_config()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = init_threads()
        .and_then(|_| resolve(cli))
        .and_then(|cfg| commands::run(&cfg));
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
