use rayon::prelude::*;
use serde::Serialize;
use starconfine::distributions::{delta_hat_apply, DeltaTerm, DistributionCombo, Side};
use starconfine::hamiltonian::{
    box_eigenvalue, box_overlap, deficiency_check, eigensolve_report, symmetry_form, ConfinedState, EigenConfig,
    EigenRecord, EigenReport,
};
use starconfine::quadrature::{bulk_mask, DEFAULT_MARGIN};
use starconfine::verify::{
    confined_stargen_residual_with, naive_stargen_residual_with, periodic_control, wigner_boundary_condition,
    VerifyConfig,
};
use starconfine::weylwigner::{confined_eigenfunction, stargen_field, wigner_function};
use starconfine::{Grid1D, PhaseSpaceField, PhaseSpaceGrid, Wavefunction, C64};

use crate::config::{Command, Format, RunConfig};
use crate::output::{OutputDir, RUN_CONFIG};
use crate::CliError;

pub const SYMMETRY_TOL: f64 = 1e-8;
pub const BOUNDARY_FORMULA_TOL: f64 = 1e-7;
pub const SPECTRUM_TOL: f64 = 0.01;
pub const MASS_TOL: f64 = 0.01;
pub const REALNESS_TOL: f64 = 1e-8;
pub const WIGNER_TOL: f64 = 1e-3;
pub const IMAG_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    Below,
    Above,
    Flag,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub kind: CheckKind,
    pub value: f64,
    pub threshold: Option<f64>,
    pub pass: bool,
}

impl Check {
    fn below(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            kind: CheckKind::Below,
            value,
            threshold: Some(threshold),
            pass: value < threshold,
        }
    }

    fn above(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            kind: CheckKind::Above,
            value,
            threshold: Some(threshold),
            pass: value > threshold,
        }
    }

    fn flag(name: impl Into<String>, pass: bool) -> Self {
        Self {
            name: name.into(),
            kind: CheckKind::Flag,
            value: f64::from(u8::from(pass)),
            threshold: None,
            pass,
        }
    }
}

impl std::fmt::Display for Check {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let verdict = if self.pass { "PASS" } else { "FAIL" };
        match (self.kind, self.threshold) {
            (CheckKind::Below, Some(t)) => write!(f, "{verdict} {}: {:.3e} < {t:.1e}", self.name, self.value),
            (CheckKind::Above, Some(t)) => write!(f, "{verdict} {}: {:.3e} > {t:.1e}", self.name, self.value),
            _ => write!(f, "{verdict} {}", self.name),
        }
    }
}

#[derive(Debug, Serialize)]
struct CheckReport<'a> {
    command: Command,
    pass: bool,
    checks: &'a [Check],
}

/// Runs the command, writes its outputs and returns whether every check passed.
pub fn run(cfg: &RunConfig) -> Result<bool, CliError> {
    let mut out = OutputDir::create(&cfg.out)?;
    let echo = toml::to_string(cfg).map_err(|e| CliError::Config(e.to_string()))?;
    out.write(RUN_CONFIG, echo.as_bytes())?;
    let checks = match cfg.command {
        Command::Stargen => stargen(cfg, &mut out)?,
        Command::Spectrum => spectrum(cfg, &mut out)?,
        Command::Selfadjoint => selfadjoint(cfg, &mut out)?,
        Command::Wigner => wigner(cfg, &mut out)?,
        Command::Distrib => distrib(cfg, &mut out)?,
    };
    let pass = checks.iter().all(|c| c.pass);
    for c in &checks {
        println!("{c}");
    }
    out.write_json(
        "checks.json",
        &CheckReport {
            command: cfg.command,
            pass,
            checks: &checks,
        },
    )?;
    out.finish()?;
    Ok(pass)
}

fn phase_space_grid(cfg: &RunConfig) -> Result<PhaseSpaceGrid, CliError> {
    let x = Grid1D::new(-cfg.x_max, cfg.x_max, cfg.grid_n)?;
    Ok(PhaseSpaceGrid::fft_lattice(x, 4.0 * cfg.x_max, 2 * cfg.grid_n)?)
}

/// `F_EE.csv` for a single energy, `E0.5_F_EE.csv` etc. otherwise.
fn file_name(cfg: &RunConfig, e: f64, base: &str) -> String {
    if cfg.energies.len() == 1 {
        base.into()
    } else {
        format!("E{e}_{base}")
    }
}

fn write_field(cfg: &RunConfig, out: &mut OutputDir, stem: &str, f: &PhaseSpaceField) -> Result<(), CliError> {
    if cfg.wants(Format::Csv) {
        let mut buf = Vec::new();
        f.write_csv(&mut buf)?;
        out.write(&format!("{stem}.csv"), &buf)?;
    }
    if cfg.wants(Format::Binary) {
        let mut buf = Vec::new();
        f.write_binary(&mut buf)?;
        out.write(&format!("{stem}.bin"), &buf)?;
    }
    Ok(())
}

fn write_table<T: Serialize>(cfg: &RunConfig, out: &mut OutputDir, stem: &str, rows: &[T]) -> Result<(), CliError> {
    if cfg.wants(Format::Csv) {
        out.write_csv(&format!("{stem}.csv"), rows)?;
    }
    if cfg.wants(Format::Json) {
        out.write_json(&format!("{stem}.json"), &rows)?;
    }
    Ok(())
}

fn stargen(cfg: &RunConfig, out: &mut OutputDir) -> Result<Vec<Check>, CliError> {
    let grid = phase_space_grid(cfg)?;
    let mut vcfg = VerifyConfig::default();
    vcfg.confined.c = cfg.c;
    vcfg.confined.schedule = cfg.eta.clone();
    vcfg.validate()?;
    let confined_grid = vcfg.confined.grid.build()?;
    let mut checks = Vec::new();
    for &e in &cfg.energies {
        let f = stargen_field(e, &grid)?;
        let stem = file_name(cfg, e, "F_EE");
        write_field(cfg, out, &stem, &f)?;

        let boundary = wigner_boundary_condition(&f);
        out.write_json(&file_name(cfg, e, "boundary.json"), &boundary)?;
        checks.push(Check::below(format!("E={e} boundary |∫dp F(0,p)|"), boundary.value.abs(), vcfg.boundary.tol));

        let naive = naive_stargen_residual_with(e, &grid, &vcfg)?;
        out.write_json(&file_name(cfg, e, "naive_residual.json"), &naive)?;
        if let Some(b) = &naive.bulk {
            checks.push(Check::above(format!("E={e} naive bulk residual"), b.relative, vcfg.naive.bulk_min));
        }
        let control = periodic_control(e, &vcfg)?;
        checks.push(Check::below(format!("E={e} periodic control"), control.residual, vcfg.naive.control_max));

        let confined = confined_stargen_residual_with(e, &confined_grid, &cfg.eta, &vcfg)?;
        if confined.unconverged {
            return Err(CliError::Numerical(format!(
                "E={e}: star product series did not converge on the confined grid"
            )));
        }
        out.write_json(&file_name(cfg, e, "confined_residual.json"), &confined)?;
        let stem = file_name(cfg, e, "convergence");
        write_table(cfg, out, &stem, &confined.convergence)?;
        let monotone = confined.monotone(vcfg.confined.noise);
        for ((id, ratio), (_, mono)) in confined.ratios().into_iter().zip(monotone) {
            checks.push(Check::below(format!("E={e} {id} final/initial"), ratio, vcfg.confined.ratio_max));
            checks.push(Check::flag(format!("E={e} {id} monotone"), mono));
        }
        if let Some(lr) = confined.left_right_discrepancy {
            checks.push(Check::below(format!("E={e} left/right"), lr, vcfg.confined.left_right_tol));
        }
    }
    Ok(checks)
}

#[derive(Debug, Clone, Serialize)]
struct SpectrumRecord {
    mode: usize,
    #[serde(flatten)]
    record: EigenRecord,
    imag: f64,
    box_energy: f64,
    relative_error: f64,
    box_overlap: f64,
}

#[derive(Debug, Clone, Serialize)]
struct SpectrumRow {
    eta: f64,
    eps: f64,
    mode: usize,
    #[serde(rename = "E")]
    energy: f64,
    box_energy: f64,
    relative_error: f64,
    residual: f64,
    mass_positive_x: f64,
}

fn spectrum(cfg: &RunConfig, out: &mut OutputDir) -> Result<Vec<Check>, CliError> {
    let ecfg = EigenConfig::default();
    let reports: Vec<EigenReport> = cfg
        .eta
        .par_iter()
        .map(|&eta| eigensolve_report(cfg.l, cfg.grid_n, eta, cfg.c * eta, cfg.modes, &ecfg))
        .collect::<Result<_, _>>()?;
    let mut rows = Vec::new();
    for r in &reports {
        for (i, m) in r.confined.iter().enumerate() {
            let exact = box_eigenvalue(cfg.l, i + 1);
            rows.push(SpectrumRow {
                eta: m.eta,
                eps: m.eps,
                mode: i + 1,
                energy: m.energy,
                box_energy: exact,
                relative_error: (m.energy - exact).abs() / exact,
                residual: m.residual,
                mass_positive_x: m.mass_positive_x,
            });
        }
    }
    let finest = reports.last().expect("schedule is non-empty");
    let records: Vec<SpectrumRecord> = finest
        .confined
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let exact = box_eigenvalue(cfg.l, i + 1);
            SpectrumRecord {
                mode: i + 1,
                record: m.record(),
                imag: m.imag,
                box_energy: exact,
                relative_error: (m.energy - exact).abs() / exact,
                box_overlap: box_overlap(m, i + 1),
            }
        })
        .collect();
    out.write_json("spectrum.json", &records)?;
    write_table(cfg, out, "spectrum_convergence", &rows)?;

    let mut checks = Vec::new();
    for r in &records {
        checks.push(Check::below(format!("mode {} relative error", r.mode), r.relative_error, SPECTRUM_TOL));
        checks.push(Check::below(format!("mode {} mass at x>0", r.mode), r.record.mass_positive_x, MASS_TOL));
    }
    for mode in 0..cfg.modes {
        let decreasing = reports
            .windows(2)
            .all(|w| w[1].confined[mode].mass_positive_x < w[0].confined[mode].mass_positive_x);
        checks.push(Check::flag(format!("mode {} mass decreases with eta", mode + 1), decreasing));
    }
    let worst_imag = reports
        .iter()
        .flat_map(|r| &r.confined)
        .map(|m| m.imag.abs() / m.energy.abs())
        .fold(0.0, f64::max);
    checks.push(Check::below("relative |Im E|", worst_imag, REALNESS_TOL));
    Ok(checks)
}

#[derive(Debug, Clone, Serialize)]
struct SymmetryRow {
    xi: String,
    psi: String,
    xi_in_domain: bool,
    psi_in_domain: bool,
    boundary_re: f64,
    boundary_im: f64,
    quadrature_re: f64,
    quadrature_im: f64,
    discrepancy: f64,
}

fn selfadjoint(cfg: &RunConfig, out: &mut OutputDir) -> Result<Vec<Check>, CliError> {
    if let Some(s) = cfg.states.iter().find(|s| !(s.decay > 0.0)) {
        return Err(CliError::Config(format!(
            "states.decay: state {} must decay towards -inf (decay > 0)",
            s.label
        )));
    }
    let grid = Grid1D::new(-10.0, 2.0, 64)?;
    let states: Vec<(String, ConfinedState)> = cfg
        .states
        .iter()
        .map(|s| (s.label.clone(), ConfinedState::new(s.phi(), grid)))
        .collect();
    let pairs: Vec<(usize, usize)> = (0..states.len())
        .flat_map(|i| (0..states.len()).map(move |j| (i, j)))
        .collect();
    let rows: Vec<SymmetryRow> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let (xi_label, xi) = &states[i];
            let (psi_label, psi) = &states[j];
            let w = symmetry_form(xi, psi);
            SymmetryRow {
                xi: xi_label.clone(),
                psi: psi_label.clone(),
                xi_in_domain: xi.in_maximal_domain(),
                psi_in_domain: psi.in_maximal_domain(),
                boundary_re: w.boundary.re,
                boundary_im: w.boundary.im,
                quadrature_re: w.quadrature.re,
                quadrature_im: w.quadrature.im,
                discrepancy: w.discrepancy(),
            }
        })
        .collect();
    write_table(cfg, out, "symmetry", &rows)?;
    let deficiency = cfg.k.iter().map(|&k| deficiency_check(k)).collect::<Result<Vec<_>, _>>()?;
    out.write_json("deficiency.json", &deficiency)?;

    let domain = rows.iter().filter(|r| r.xi_in_domain && r.psi_in_domain);
    let worst_domain = domain
        .map(|r| C64::new(r.quadrature_re, r.quadrature_im).norm())
        .fold(0.0, f64::max);
    let worst_formula = rows.iter().map(|r| r.discrepancy).fold(0.0, f64::max);
    let mut checks = vec![
        Check::below("domain pairs |w(xi, psi)|", worst_domain, SYMMETRY_TOL),
        Check::below("boundary formula vs quadrature", worst_formula, BOUNDARY_FORMULA_TOL),
    ];
    for r in &deficiency {
        checks.push(Check::flag(format!("k={} deficiency indices (0,0)", r.k), r.self_adjoint()));
    }
    Ok(checks)
}

#[derive(Debug, Clone, Serialize)]
struct WignerSummary {
    label: String,
    file_stem: String,
    max_abs: f64,
    max_abs_imag: f64,
    /// Relative bulk `L²` distance from the closed form (eigenstates only).
    closed_form_distance: Option<f64>,
}

fn closed_form_distance(w: &PhaseSpaceField, e: f64, grid: &PhaseSpaceGrid) -> Result<f64, CliError> {
    let f = stargen_field(e, grid)?;
    let mask = bulk_mask(&grid.x, &[0.0], DEFAULT_MARGIN);
    let np = grid.p.len();
    let (mut num, mut den) = (0.0, 0.0);
    for (i, x) in grid.x.points().into_iter().enumerate() {
        if x >= 0.0 || !mask[i] {
            continue;
        }
        for j in 0..np {
            let a = f.get(i, j);
            num += (w.get(i, j) * (2.0 * std::f64::consts::PI) - a).norm_sqr();
            den += a.norm_sqr();
        }
    }
    Ok((num / den).sqrt())
}

fn wigner(cfg: &RunConfig, out: &mut OutputDir) -> Result<Vec<Check>, CliError> {
    let grid = phase_space_grid(cfg)?;
    let mut states: Vec<(String, Option<f64>, Wavefunction)> = Vec::new();
    for &e in &cfg.energies {
        states.push((format!("E{e}"), Some(e), confined_eigenfunction(e, grid.x)?));
    }
    for s in &cfg.states {
        let phi = s.phi();
        let psi = Wavefunction::from_fn(grid.x, move |x| if x < 0.0 { phi.eval(x) } else { C64::new(0.0, 0.0) });
        states.push((s.label.clone(), None, psi));
    }
    let mut summaries = Vec::new();
    let mut checks = Vec::new();
    for (label, energy, psi) in states {
        let w = wigner_function(&psi, &grid)?;
        let stem = format!("wigner_{label}");
        write_field(cfg, out, &stem, &w)?;
        let distance = energy.map(|e| closed_form_distance(&w, e, &grid)).transpose()?;
        let max_abs = w.max_abs();
        let max_abs_imag = w.max_abs_imag();
        checks.push(Check::below(format!("{label} relative |Im W|"), max_abs_imag / max_abs.max(f64::MIN_POSITIVE), IMAG_TOL));
        if let Some(d) = distance {
            checks.push(Check::below(format!("{label} distance from closed form"), d, WIGNER_TOL));
        }
        summaries.push(WignerSummary {
            label,
            file_stem: stem,
            max_abs,
            max_abs_imag,
            closed_form_distance: distance,
        });
    }
    out.write_json("wigner.json", &summaries)?;
    Ok(checks)
}

#[derive(Debug, Clone, Serialize)]
struct IdentityRow {
    n: usize,
    m: usize,
    side: Side,
    result: DistributionCombo,
    canonical: String,
    expected: String,
    pass: bool,
}

fn distrib(_cfg: &RunConfig, out: &mut OutputDir) -> Result<Vec<Check>, CliError> {
    let mut rows = Vec::new();
    for n in 0..=3 {
        for m in 0..=2 {
            let theta = DistributionCombo::theta_derivative(m, 8);
            for side in [Side::Plus, Side::Minus] {
                let result = delta_hat_apply(n, 0.0, side, &theta)?;
                let expected = if side == Side::Plus && m == 0 {
                    DistributionCombo::singular_only(vec![DeltaTerm::new(0.0, n, 1.0)])
                } else {
                    DistributionCombo::zero()
                };
                let pass = result == expected;
                let sign = if side == Side::Plus { "+" } else { "-" };
                println!("delta^({n})_{sign} [theta^({m})(x)] = {result}");
                rows.push(IdentityRow {
                    n,
                    m,
                    side,
                    canonical: result.to_string(),
                    expected: expected.to_string(),
                    result,
                    pass,
                });
            }
        }
    }
    out.write_json("distrib.json", &rows)?;
    let failures = rows.iter().filter(|r| !r.pass).count();
    Ok(vec![Check::below("identity mismatches", failures as f64, 0.5)])
}
