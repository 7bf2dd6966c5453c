use serde::{Deserialize, Serialize};

use crate::distributions::Kernel;
use crate::error::{Error, Result};
use crate::expfn::ExpPoly;
use crate::grid::{Grid1D, PhaseSpaceGrid};

/// The versioned threshold file shipped with the crate.
pub const DEFAULT_CONFIG: &str = include_str!("../../config/verification.toml");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    pub version: u32,
    pub naive: NaiveConfig,
    pub confined: ConfinedConfig,
    pub boundary: BoundaryConfig,
    pub corpus: Vec<TestFunction>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NaiveConfig {
    /// Lower bound the bulk relative residual must exceed.
    pub bulk_min: f64,
    /// Upper bound for the periodic control.
    pub control_max: f64,
    pub energies: Vec<f64>,
    /// Control box length in units of `2π`; `k = √E` must fit a whole number
    /// of times.
    pub control_period_over_2pi: f64,
    pub control_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfinedConfig {
    pub schedule: Vec<f64>,
    pub c: f64,
    pub kernel: Kernel,
    /// Largest accepted final/initial weak residual ratio.
    pub ratio_max: f64,
    /// Relative growth tolerated between consecutive schedule points.
    pub noise: f64,
    pub left_right_tol: f64,
    pub grid: ConfinedGrid,
}

/// Phase-space grid for the confined residual. The `x` spacing divides every
/// `ε = c η` so shifted rows are exact copies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfinedGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub dx: f64,
    pub n_p: usize,
    pub y_span: f64,
}

impl ConfinedGrid {
    pub fn build(&self) -> Result<PhaseSpaceGrid> {
        let n = ((self.x_max - self.x_min) / self.dx).round() as usize + 1;
        let x = Grid1D::with_spacing(self.x_min, self.dx, n)?;
        PhaseSpaceGrid::fft_lattice(x, self.y_span, self.n_p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryConfig {
    pub tol: f64,
}

/// Separable test function `t(x) s(p)` with
/// `t = exp(-(x - c)²/(2w²)) [cos(2(x - c)/w)]` and `s = exp(-p²/(2w²))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestFunction {
    pub id: String,
    pub center: f64,
    pub width: f64,
    pub modulated: bool,
}

impl TestFunction {
    pub fn t(&self) -> ExpPoly {
        let g = ExpPoly::gaussian(self.center, self.width);
        if self.modulated {
            g * ExpPoly::cos(2.0 / self.width).shifted(self.center)
        } else {
            g
        }
    }

    pub fn s(&self, p: f64) -> f64 {
        (-p * p / (2.0 * self.width * self.width)).exp()
    }
}

impl VerifyConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, why: &str| Err(Error::Config(format!("{field}: {why}")));
        if self.corpus.is_empty() {
            return bad("corpus", "at least one test function is required");
        }
        if let Some(t) = self.corpus.iter().find(|t| !(t.width > 0.0)) {
            return bad("corpus.width", &format!("test function {} needs a positive width", t.id));
        }
        if self.naive.energies.iter().any(|e| !(*e > 0.0)) {
            return bad("naive.energies", "energies must be positive");
        }
        if self.naive.control_points < 8 || self.naive.control_points % 2 != 0 {
            return bad("naive.control_points", "must be even and at least 8");
        }
        validate_schedule(&self.confined.schedule)?;
        if self.confined.c < crate::distributions::MIN_C {
            return bad("confined.c", "below the minimum offset ratio");
        }
        let g = &self.confined.grid;
        if !(g.dx > 0.0) || g.x_max <= g.x_min || !(g.x_min < 0.0 && g.x_max > 0.0) {
            return bad("confined.grid", "x range must straddle 0 with positive spacing");
        }
        Ok(())
    }
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self::from_toml(DEFAULT_CONFIG).expect("bundled verification config is valid")
    }
}

/// At least three strictly decreasing positive widths.
pub fn validate_schedule(schedule: &[f64]) -> Result<()> {
    if schedule.len() < 3 {
        return Err(Error::Config(format!(
            "eta schedule needs at least 3 points, got {}",
            schedule.len()
        )));
    }
    if schedule.iter().any(|e| !(*e > 0.0)) || schedule.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Config("eta schedule must be positive and strictly decreasing".into()));
    }
    Ok(())
}
