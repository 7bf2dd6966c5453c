//! Residual reports for the stargenvalue equations of the confined particle:
//! the naive equation `p² ⋆ F = E F` (fails at the wall), the corrected
//! equation with the regularized boundary potential (repaired as `η → 0`) and
//! the Wigner-side Dirichlet condition `∫ dp F(0, p) = 0`.

mod config;

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use config::{
    validate_schedule, BoundaryConfig, ConfinedConfig, ConfinedGrid, NaiveConfig, TestFunction, VerifyConfig,
    DEFAULT_CONFIG,
};

use crate::diff::DiffScheme;
use crate::distributions::{Kernel, RegularizedDelta};
use crate::error::{Error, Result};
use crate::field::PhaseSpaceField;
use crate::grid::PhaseSpaceGrid;
use crate::quadrature::{bulk_mask, tapered_weights, weights, QuadratureRule, DEFAULT_TAPER_FRACTION};
use crate::star::{
    star_product, star_product_right, star_with_x_symbol, star_with_x_symbol_right, Operand, PolynomialSymbol,
    StarConfig, XStarPath, XSymbol,
};
use crate::weylwigner::{periodic_wigner, stargen_field};

/// Samples per wavelength required of `e^{2ipx}` for a momentum to count as
/// resolved by the `x` grid in bulk norms.
pub const RESOLVED_POINTS_PER_WAVELENGTH: f64 = 8.0;

/// Stated with every report: where the thresholds come from.
pub const PROVENANCE: &str = "thresholds self-calibrated on the first run and frozen in config/verification.toml";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSummary {
    pub x_min: f64,
    pub x_max: f64,
    pub nx: usize,
    pub p_min: f64,
    pub p_max: f64,
    pub np: usize,
}

impl From<&PhaseSpaceGrid> for GridSummary {
    fn from(g: &PhaseSpaceGrid) -> Self {
        Self {
            x_min: g.x.x_min(),
            x_max: g.x.x_max(),
            nx: g.x.len(),
            p_min: g.p.x_min(),
            p_max: g.p.x_max(),
            np: g.p.len(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResidualKind {
    Naive,
    Confined,
}

/// Which side the Hamiltonian multiplies from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StarSide {
    Left,
    Right,
}

/// Relative `L²` norm of a residual over an explicit region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BulkNorm {
    /// `‖R‖ / ‖E F‖` over the region.
    pub relative: f64,
    pub absolute: f64,
    pub reference: f64,
    /// Human-readable statement of the integration region.
    pub domain: String,
    /// Bulk rows satisfy `x ≤ x_upper`.
    pub x_upper: f64,
    pub margin_points: usize,
    /// Bulk columns satisfy `|p| ≤ p_max`.
    pub p_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakResidual {
    pub test_id: String,
    pub eta: Option<f64>,
    pub side: StarSide,
    /// `∫∫ R(x, p) t(x) s(p) dx dp`.
    pub value: C64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub eta: f64,
    pub residual: f64,
    pub test_id: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Regularization {
    pub kernel: Kernel,
    pub c: f64,
    /// Widths, decreasing.
    pub schedule: Vec<f64>,
    /// `ε = c η` for each width.
    pub offsets: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub kind: ResidualKind,
    pub energy: f64,
    pub grid: GridSummary,
    pub regularization: Option<Regularization>,
    pub bulk: Option<BulkNorm>,
    /// Region over which the weak pairings integrate.
    pub weak_domain: String,
    pub weak: Vec<WeakResidual>,
    /// `|⟨R_η, t ⊗ s⟩|` of the left residual, sorted by decreasing `η`.
    pub convergence: Vec<ConvergenceRow>,
    /// `max |⟨R_right⟩ - conj ⟨R_left⟩|` over tests and widths.
    pub left_right_discrepancy: Option<f64>,
    /// Largest `|Im R|` on the bulk region.
    pub max_imag: Option<f64>,
    pub unconverged: bool,
    /// Rows whose shifted source fell outside the grid (their values are zero).
    pub invalid_rows: usize,
    pub config_version: u32,
    pub provenance: String,
}

impl ResidualReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn test_ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = Vec::new();
        for r in &self.convergence {
            if !ids.contains(&r.test_id) {
                ids.push(r.test_id.clone());
            }
        }
        ids
    }

    /// Residuals along the schedule for one test function.
    pub fn trend(&self, test_id: &str) -> Vec<f64> {
        self.convergence
            .iter()
            .filter(|r| r.test_id == test_id)
            .map(|r| r.residual)
            .collect()
    }

    /// Final over initial residual for every test function.
    pub fn ratios(&self) -> Vec<(String, f64)> {
        self.test_ids()
            .into_iter()
            .map(|id| {
                let t = self.trend(&id);
                let r = t.last().copied().unwrap_or(f64::NAN) / t.first().copied().unwrap_or(f64::NAN);
                (id, r)
            })
            .collect()
    }

    /// Non-increasing along the schedule up to `noise` relative growth.
    pub fn monotone(&self, noise: f64) -> Vec<(String, bool)> {
        self.test_ids()
            .into_iter()
            .map(|id| {
                let t = self.trend(&id);
                let ok = t.windows(2).all(|w| w[1] <= w[0] * (1.0 + noise));
                (id, ok)
            })
            .collect()
    }
}

/// Integration weights and test-function samples for weak pairings.
struct Pairing {
    wx: Vec<f64>,
    wp: Vec<f64>,
    tests: Vec<(String, Vec<f64>, Vec<f64>)>,
}

impl Pairing {
    fn new(grid: &PhaseSpaceGrid, corpus: &[TestFunction]) -> Self {
        let xs = grid.x.points();
        let ps = grid.p.points();
        let tests = corpus
            .iter()
            .map(|tf| {
                let t = tf.t();
                let tx = xs.iter().map(|&x| t.eval(x).re).collect();
                let sp = ps.iter().map(|&p| tf.s(p)).collect();
                (tf.id.clone(), tx, sp)
            })
            .collect();
        Self {
            wx: weights(grid.x.len(), grid.dx(), QuadratureRule::Trapezoid),
            wp: weights(grid.p.len(), grid.dp(), QuadratureRule::Trapezoid),
            tests,
        }
    }

    fn pair(&self, f: &PhaseSpaceField) -> Vec<C64> {
        let np = f.grid().p.len();
        self.tests
            .iter()
            .map(|(_, tx, sp)| {
                f.values()
                    .par_chunks(np)
                    .zip(tx.par_iter().zip(&self.wx))
                    .map(|(row, (t, w))| {
                        if *t == 0.0 {
                            return C64::new(0.0, 0.0);
                        }
                        let inner: C64 = row
                            .iter()
                            .zip(sp.iter().zip(&self.wp))
                            .map(|(v, (s, wp))| v * (s * wp))
                            .sum();
                        inner * (t * w)
                    })
                    .sum()
            })
            .collect()
    }

    fn ids(&self) -> impl Iterator<Item = &String> {
        self.tests.iter().map(|(id, _, _)| id)
    }
}

fn star_config(scheme: DiffScheme, breakpoints: Vec<f64>) -> StarConfig {
    StarConfig {
        scheme,
        breakpoints,
        ..StarConfig::default()
    }
}

/// `p² ⋆ F - E F` (or `F ⋆ p² - E F`) through the terminating expansion.
fn free_residual(f: &PhaseSpaceField, e: f64, side: StarSide, cfg: &StarConfig) -> Result<PhaseSpaceField> {
    let p2 = Operand::Poly(PolynomialSymbol::p_squared());
    let h = match side {
        StarSide::Left => star_product(&p2, f, cfg)?,
        StarSide::Right => star_product_right(f, &p2, cfg)?,
    };
    let mut r = h.add_scaled(f, C64::new(-e, 0.0))?;
    r.flags.unconverged = h.flags.unconverged;
    Ok(r)
}

/// Naive residual with the bundled configuration.
pub fn naive_stargen_residual(e: f64, psgrid: &PhaseSpaceGrid) -> Result<ResidualReport> {
    naive_stargen_residual_with(e, psgrid, &VerifyConfig::default())
}

/// `R = p² ⋆ F_EE - E F_EE` from the exact three-term expansion on analytic
/// samples. The bulk norm covers `x ≤ -margin dx` and the momenta whose
/// oscillation `e^{2ipx}` the `x` grid resolves.
pub fn naive_stargen_residual_with(e: f64, psgrid: &PhaseSpaceGrid, cfg: &VerifyConfig) -> Result<ResidualReport> {
    if !(e > 0.0) {
        return Err(Error::Domain(format!("energy must be positive (got {e})")));
    }
    let star = star_config(DiffScheme::FiniteDifference, vec![0.0]);
    let f = stargen_field(e, psgrid)?;
    let r = free_residual(&f, e, StarSide::Left, &star)?;

    let (_, np) = psgrid.shape();
    let dx = psgrid.dx();
    let p_res = PI / (RESOLVED_POINTS_PER_WAVELENGTH * dx);
    let mask = bulk_mask(&psgrid.x, &[0.0], star.margin);
    let xs = psgrid.x.points();
    let ps = psgrid.p.points();
    let (mut num, mut den, mut imag) = (0.0, 0.0, 0.0f64);
    let mut x_upper = f64::NEG_INFINITY;
    for (i, &x) in xs.iter().enumerate() {
        if x >= 0.0 || !mask[i] {
            continue;
        }
        x_upper = x_upper.max(x);
        for (j, &p) in ps.iter().enumerate() {
            if p.abs() > p_res {
                continue;
            }
            let v = r.values()[i * np + j];
            num += v.norm_sqr();
            den += (f.values()[i * np + j] * e).norm_sqr();
            imag = imag.max(v.im.abs());
        }
    }
    let cell = dx * psgrid.dp();
    let bulk = BulkNorm {
        relative: (num / den).sqrt(),
        absolute: (num * cell).sqrt(),
        reference: (den * cell).sqrt(),
        domain: format!(
            "x in [{:.4}, {:.4}] (x < 0, {} spacings from the wall), |p| <= {:.4}",
            psgrid.x.x_min(),
            x_upper,
            star.margin,
            p_res
        ),
        x_upper,
        margin_points: star.margin,
        p_max: p_res,
    };

    let pairing = Pairing::new(psgrid, &cfg.corpus);
    let weak = pairing
        .ids()
        .zip(pairing.pair(&r))
        .map(|(id, value)| WeakResidual {
            test_id: id.clone(),
            eta: None,
            side: StarSide::Left,
            value,
        })
        .collect();
    Ok(ResidualReport {
        kind: ResidualKind::Naive,
        energy: e,
        grid: psgrid.into(),
        regularization: None,
        bulk: Some(bulk),
        weak_domain: "whole grid, trapezoid in x and p".into(),
        weak,
        convergence: Vec::new(),
        left_right_discrepancy: None,
        max_imag: Some(imag),
        unconverged: r.flags.unconverged,
        invalid_rows: 0,
        config_version: cfg.version,
        provenance: PROVENANCE.into(),
    })
}

/// Result of the unconfined control experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlResult {
    pub energy: f64,
    pub k: f64,
    pub period: f64,
    pub points: usize,
    /// `max |p² ⋆ W - E W| / max |E W|`.
    pub residual: f64,
}

/// The same residual for `ψ = e^{ikx} - e^{-ikx}` on a periodic box, where no
/// wall exists. `k` must be a multiple of `2π / period`.
pub fn periodic_control_residual(e: f64, period: f64, points: usize) -> Result<ControlResult> {
    if !(e > 0.0) {
        return Err(Error::Domain(format!("energy must be positive (got {e})")));
    }
    let k = e.sqrt();
    let m = k * period / (2.0 * PI);
    if (m - m.round()).abs() > 1e-9 {
        return Err(Error::Config(format!(
            "k = {k} is not a lattice wavenumber of a box of length {period}"
        )));
    }
    let h = period / points as f64;
    let values: Vec<C64> = (0..points)
        .map(|i| {
            let x = i as f64 * h;
            C64::new(0.0, k * x).exp() - C64::new(0.0, -k * x).exp()
        })
        .collect();
    let w = periodic_wigner(&values, 0.0, period)?;
    let star = star_config(DiffScheme::Spectral, Vec::new());
    let r = free_residual(&w, e, StarSide::Left, &star)?;
    let scale = w.max_abs() * e;
    Ok(ControlResult {
        energy: e,
        k,
        period,
        points,
        residual: r.max_abs() / scale,
    })
}

/// Control with the box from the configuration.
pub fn periodic_control(e: f64, cfg: &VerifyConfig) -> Result<ControlResult> {
    periodic_control_residual(
        e,
        2.0 * PI * cfg.naive.control_period_over_2pi,
        cfg.naive.control_points,
    )
}

/// Confined residual with the bundled configuration.
pub fn confined_stargen_residual(e: f64, psgrid: &PhaseSpaceGrid, schedule: &[f64]) -> Result<ResidualReport> {
    confined_stargen_residual_with(e, psgrid, schedule, &VerifyConfig::default())
}

/// `R_η = (p² + δ'_η) ⋆ F_EE(x - ε, ·) - E F_EE` and its right-product
/// counterpart, paired with the test-function corpus for every `η` of the
/// schedule (`ε = c η`). The boundary term uses the resummed `x`-product.
pub fn confined_stargen_residual_with(
    e: f64,
    psgrid: &PhaseSpaceGrid,
    schedule: &[f64],
    cfg: &VerifyConfig,
) -> Result<ResidualReport> {
    if !(e > 0.0) {
        return Err(Error::Domain(format!("energy must be positive (got {e})")));
    }
    validate_schedule(schedule)?;
    let c = cfg.confined.c;
    let star = StarConfig {
        c,
        x_path: XStarPath::Resummed,
        ..star_config(DiffScheme::FiniteDifference, vec![0.0])
    };
    let f = stargen_field(e, psgrid)?;
    let pairing = Pairing::new(psgrid, &cfg.corpus);

    let free_left = free_residual(&f, e, StarSide::Left, &star)?;
    let unconverged = free_left.flags.unconverged;
    let base_left = pairing.pair(&free_left);
    drop(free_left);
    let base_right = pairing.pair(&free_residual(&f, e, StarSide::Right, &star)?);

    type Point = (f64, Vec<C64>, Vec<C64>, usize);
    let mut points: Vec<Point> = schedule
        .par_iter()
        .map(|&eta| -> Result<Point> {
            let rd = RegularizedDelta::new(cfg.confined.kernel, eta, 1)?;
            let a = XSymbol::Delta {
                rd,
                location: 0.0,
                coefficient: C64::new(1.0, 0.0),
            };
            let eps = c * eta;
            let dl = star_with_x_symbol(&a, eps, &f, &star)?;
            let invalid = dl.flags.invalid_rows.len();
            let left = pairing.pair(&dl);
            drop(dl);
            let right = pairing.pair(&star_with_x_symbol_right(&a, eps, &f, &star)?);
            let left = left.iter().zip(&base_left).map(|(a, b)| a + b).collect();
            let right = right.iter().zip(&base_right).map(|(a, b)| a + b).collect();
            Ok((eta, left, right, invalid))
        })
        .collect::<Result<_>>()?;
    points.sort_by(|a, b| b.0.total_cmp(&a.0));

    let ids: Vec<&String> = pairing.ids().collect();
    let mut weak = Vec::new();
    let mut convergence = Vec::new();
    let mut discrepancy = 0.0f64;
    let mut invalid_rows = 0;
    for (eta, left, right, invalid) in &points {
        invalid_rows = invalid_rows.max(*invalid);
        for ((id, l), r) in ids.iter().zip(left).zip(right) {
            discrepancy = discrepancy.max((r - l.conj()).norm());
            weak.push(WeakResidual {
                test_id: (*id).clone(),
                eta: Some(*eta),
                side: StarSide::Left,
                value: *l,
            });
            weak.push(WeakResidual {
                test_id: (*id).clone(),
                eta: Some(*eta),
                side: StarSide::Right,
                value: *r,
            });
        }
    }
    for id in &ids {
        for (eta, left, _, _) in &points {
            let k = ids.iter().position(|i| i == id).expect("id present");
            convergence.push(ConvergenceRow {
                eta: *eta,
                residual: left[k].norm(),
                test_id: (*id).clone(),
            });
        }
    }
    Ok(ResidualReport {
        kind: ResidualKind::Confined,
        energy: e,
        grid: psgrid.into(),
        regularization: Some(Regularization {
            kernel: cfg.confined.kernel,
            c,
            schedule: points.iter().map(|p| p.0).collect(),
            offsets: points.iter().map(|p| c * p.0).collect(),
        }),
        bulk: None,
        weak_domain: "whole grid, trapezoid in x and p".into(),
        weak,
        convergence,
        left_right_discrepancy: Some(discrepancy),
        max_imag: None,
        unconverged,
        invalid_rows,
        config_version: cfg.version,
        provenance: PROVENANCE.into(),
    })
}

/// `∫ dp F(a, p)` evaluated on one row of the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryIntegral {
    pub value: f64,
    /// Requested position.
    pub x: f64,
    /// Row actually used.
    pub x_row: f64,
    /// Set when the requested position is not a grid node.
    pub warning: Option<String>,
}

/// `∫ dp F(0, p)` with the tapered momentum weights; zero for confined
/// stargenfunctions.
pub fn wigner_boundary_condition(f: &PhaseSpaceField) -> BoundaryIntegral {
    wigner_boundary_integral_at(f, 0.0)
}

pub fn wigner_boundary_integral_at(f: &PhaseSpaceField, a: f64) -> BoundaryIntegral {
    let grid = f.grid();
    let (row, warning) = match grid.x.node_index(a) {
        Some(i) => (i, None),
        None => {
            let i = grid.x.nearest_index(a);
            (
                i,
                Some(format!(
                    "x = {a} is not a grid node; nearest row x = {} used",
                    grid.x.point(i)
                )),
            )
        }
    };
    let w = tapered_weights(&grid.p, DEFAULT_TAPER_FRACTION);
    let value = f.row(row).iter().zip(&w).map(|(v, wi)| v.re * wi).sum();
    BoundaryIntegral {
        value,
        x: a,
        x_row: grid.x.point(row),
        warning,
    }
}
