use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use starconfine::{ExpPoly, C64};

use crate::CliError;

pub const DEFAULT_FIELD_N: usize = 1024;
pub const DEFAULT_X_MAX: f64 = 20.0;
pub const DEFAULT_EIGEN_N: usize = 16384;
pub const DEFAULT_STARGEN_ETA: [f64; 3] = [0.2, 0.1, 0.05];
pub const DEFAULT_SPECTRUM_ETA: [f64; 6] = [0.2, 0.1, 0.05, 0.025, 0.0125, 0.00625];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Stargen,
    Spectrum,
    Selfadjoint,
    Wigner,
    Distrib,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
    #[value(name = "binary")]
    #[serde(rename = "binary")]
    Binary,
}

/// `θ(-x) P(x) e^{decay x} trig(freq x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSpec {
    pub label: String,
    #[serde(default = "one")]
    pub poly: Vec<f64>,
    #[serde(default)]
    pub decay: f64,
    #[serde(default)]
    pub freq: f64,
    #[serde(default)]
    pub trig: Trig,
}

fn one() -> Vec<f64> {
    vec![1.0]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trig {
    #[default]
    None,
    Sin,
    Cos,
}

impl StateSpec {
    pub fn new(label: &str, poly: &[f64], decay: f64, freq: f64, trig: Trig) -> Self {
        Self {
            label: label.into(),
            poly: poly.to_vec(),
            decay,
            freq,
            trig,
        }
    }

    pub fn phi(&self) -> ExpPoly {
        let base = ExpPoly::polynomial(&self.poly) * ExpPoly::exp(C64::new(self.decay, 0.0));
        match self.trig {
            Trig::None => base,
            Trig::Sin => base * ExpPoly::sin(self.freq),
            Trig::Cos => base * ExpPoly::cos(self.freq),
        }
    }
}

pub fn default_states() -> Vec<StateSpec> {
    let mut out = Vec::new();
    for a in [0.5, 1.0, 1.5] {
        out.push(StateSpec::new(&format!("x_exp{a}"), &[0.0, 1.0], a, 0.0, Trig::None));
        out.push(StateSpec::new(&format!("sin2_exp{a}"), &[1.0], a, 2.0, Trig::Sin));
    }
    out.push(StateSpec::new("x_plus_x2_exp1", &[0.0, 1.0, 1.0], 1.0, 0.0, Trig::None));
    // outside the Dirichlet domain
    out.push(StateSpec::new("exp1", &[1.0], 1.0, 0.0, Trig::None));
    out.push(StateSpec::new("cos2_exp0.8", &[1.0], 0.8, 2.0, Trig::Cos));
    out
}

/// Values read from `--config`; every key is optional and flags win.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    /// Present in echoed configs; must match the subcommand.
    pub command: Option<Command>,
    #[serde(rename = "E")]
    pub energies: Option<Vec<f64>>,
    pub grid_n: Option<usize>,
    pub x_max: Option<f64>,
    pub eta: Option<Vec<f64>>,
    pub c: Option<f64>,
    #[serde(rename = "L")]
    pub l: Option<f64>,
    pub modes: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Option<Vec<Format>>,
    pub k: Option<Vec<f64>>,
    pub states: Option<Vec<StateSpec>>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("config: cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("config: {}: {e}", path.display())))
    }

    /// Fields of `other` that are set replace ours.
    pub fn overlay(self, other: FileConfig) -> Self {
        Self {
            command: other.command.or(self.command),
            energies: other.energies.or(self.energies),
            grid_n: other.grid_n.or(self.grid_n),
            x_max: other.x_max.or(self.x_max),
            eta: other.eta.or(self.eta),
            c: other.c.or(self.c),
            l: other.l.or(self.l),
            modes: other.modes.or(self.modes),
            out: other.out.or(self.out),
            format: other.format.or(self.format),
            k: other.k.or(self.k),
            states: other.states.or(self.states),
        }
    }
}

/// Fully resolved run description, echoed into the output directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    #[serde(rename = "E")]
    pub energies: Vec<f64>,
    pub grid_n: usize,
    pub x_max: f64,
    pub eta: Vec<f64>,
    pub c: f64,
    #[serde(rename = "L")]
    pub l: f64,
    pub modes: usize,
    pub out: PathBuf,
    pub format: Vec<Format>,
    pub k: Vec<f64>,
    pub states: Vec<StateSpec>,
}

fn bad(field: &str, why: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{field}: {why}"))
}

impl RunConfig {
    pub fn resolve(command: Command, cfg: FileConfig) -> Result<Self, CliError> {
        if let Some(c) = cfg.command.filter(|c| *c != command) {
            return Err(bad(
                "command",
                format!("config is for `{}`, not `{}`", c.name(), command.name()),
            ));
        }
        let (default_n, default_eta): (usize, &[f64]) = match command {
            Command::Spectrum => (DEFAULT_EIGEN_N, &DEFAULT_SPECTRUM_ETA),
            _ => (DEFAULT_FIELD_N, &DEFAULT_STARGEN_ETA),
        };
        let mut format = cfg.format.unwrap_or_else(|| vec![Format::Json, Format::Csv]);
        format.sort();
        format.dedup();
        let run = Self {
            command,
            energies: cfg.energies.unwrap_or_else(|| vec![1.0]),
            grid_n: cfg.grid_n.unwrap_or(default_n),
            x_max: cfg.x_max.unwrap_or(DEFAULT_X_MAX),
            eta: cfg.eta.unwrap_or_else(|| default_eta.to_vec()),
            c: cfg.c.unwrap_or(starconfine::distributions::DEFAULT_C),
            l: cfg.l.unwrap_or(std::f64::consts::PI),
            modes: cfg.modes.unwrap_or(3),
            out: cfg.out.unwrap_or_else(|| PathBuf::from(format!("out/{}", command.name()))),
            format,
            k: cfg.k.unwrap_or_else(|| vec![0.5, 1.0, 2.0]),
            states: cfg.states.unwrap_or_else(|| match command {
                Command::Selfadjoint => default_states(),
                _ => Vec::new(),
            }),
        };
        run.validate()?;
        Ok(run)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.energies.is_empty() {
            return Err(bad("E", "at least one energy is required"));
        }
        if let Some(e) = self.energies.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
            return Err(bad("E", format!("energies must be positive (got {e})")));
        }
        if self.grid_n < 16 {
            return Err(bad("grid-n", format!("need at least 16 points (got {})", self.grid_n)));
        }
        if !(self.x_max > 0.0 && self.x_max.is_finite()) {
            return Err(bad("x-max", format!("must be positive (got {})", self.x_max)));
        }
        if self.eta.is_empty() || self.eta.iter().any(|e| !(*e > 0.0)) {
            return Err(bad("eta", "widths must be positive"));
        }
        if self.eta.windows(2).any(|w| w[1] >= w[0]) {
            return Err(bad("eta", "schedule must be strictly decreasing"));
        }
        if self.command == Command::Stargen && self.eta.len() < 3 {
            return Err(bad("eta", format!("need at least 3 widths (got {})", self.eta.len())));
        }
        if !(self.c >= starconfine::distributions::MIN_C) {
            return Err(bad("c", format!("must be at least {} (got {})", starconfine::distributions::MIN_C, self.c)));
        }
        if !(self.l > 0.0 && self.l.is_finite()) {
            return Err(bad("L", format!("must be positive (got {})", self.l)));
        }
        if self.modes == 0 {
            return Err(bad("modes", "must be at least 1"));
        }
        if self.format.is_empty() {
            return Err(bad("format", "choose at least one of json, csv, binary"));
        }
        if self.k.is_empty() || self.k.iter().any(|k| !(*k > 0.0)) {
            return Err(bad("k", "deficiency wavenumbers must be positive"));
        }
        if matches!(self.command, Command::Selfadjoint) && self.states.is_empty() {
            return Err(bad("states", "the state corpus is empty"));
        }
        Ok(())
    }

    pub fn wants(&self, f: Format) -> bool {
        self.format.contains(&f)
    }
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Stargen => "stargen",
            Command::Spectrum => "spectrum",
            Command::Selfadjoint => "selfadjoint",
            Command::Wigner => "wigner",
            Command::Distrib => "distrib",
        }
    }
}
