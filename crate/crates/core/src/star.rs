//! Moyal star product `A ⋆ B = A exp[(i/2)(←∂x →∂p − ←∂p →∂x)] B` and bracket.
//!
//! Polynomial symbols use exact coefficient algebra and the series terminates.
//! Sampled fields use finite differences along each axis: `∂p` per `x`-row,
//! `∂x` per `p`-column, each parallelized over the other axis. Products with
//! symbols depending on `x` only are available as the truncated Bopp series or
//! in resummed form `(a ⋆ B)(x, p) = ∫ dy e^{-ipy} a(x + y/2) B̃(x, y)`.

use std::collections::BTreeMap;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::diff::{DiffScheme, Differentiator, MAX_ORDER};
use crate::distributions::{DistributionCombo, Kernel, RegularizedDelta, MIN_C};
use crate::error::{Error, Result};
use crate::expfn::ExpPoly;
use crate::field::PhaseSpaceField;
use crate::grid::{Grid1D, PhaseSpaceGrid};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Largest admissible truncation order.
pub const MAX_TRUNCATION: usize = 12;

/// Relative change under doubling `N` above which a result is flagged.
pub const CONVERGENCE_TOL: f64 = 1e-6;

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, j| acc * j as f64)
}

/// `Σ c_{ij} x^i p^j` with zero coefficients absent.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PolynomialSymbol {
    coeffs: BTreeMap<(usize, usize), C64>,
}

impl PolynomialSymbol {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: impl Into<C64>) -> Self {
        Self::monomial(0, 0, c)
    }

    pub fn x() -> Self {
        Self::monomial(1, 0, 1.0)
    }

    pub fn p() -> Self {
        Self::monomial(0, 1, 1.0)
    }

    /// The free Hamiltonian `p²`.
    pub fn p_squared() -> Self {
        Self::monomial(0, 2, 1.0)
    }

    pub fn monomial(x_pow: usize, p_pow: usize, c: impl Into<C64>) -> Self {
        Self::from_terms([((x_pow, p_pow), c.into())])
    }

    pub fn from_terms(terms: impl IntoIterator<Item = ((usize, usize), C64)>) -> Self {
        let mut coeffs = BTreeMap::new();
        for (k, c) in terms {
            *coeffs.entry(k).or_insert(ZERO) += c;
        }
        coeffs.retain(|_, c| *c != ZERO);
        Self { coeffs }
    }

    pub fn coefficients(&self) -> &BTreeMap<(usize, usize), C64> {
        &self.coeffs
    }

    pub fn coefficient(&self, x_pow: usize, p_pow: usize) -> C64 {
        self.coeffs.get(&(x_pow, p_pow)).copied().unwrap_or(ZERO)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Largest total degree (0 for the zero symbol).
    pub fn degree(&self) -> usize {
        self.coeffs.keys().map(|(i, j)| i + j).max().unwrap_or(0)
    }

    pub fn eval(&self, x: f64, p: f64) -> C64 {
        self.coeffs
            .iter()
            .map(|((i, j), c)| c * x.powi(*i as i32) * p.powi(*j as i32))
            .sum()
    }

    /// `∂x^kx ∂p^kp`.
    pub fn derivative(&self, kx: usize, kp: usize) -> Self {
        Self::from_terms(self.coeffs.iter().filter_map(|((i, j), c)| {
            if *i < kx || *j < kp {
                return None;
            }
            let f = (0..kx).map(|m| (i - m) as f64).product::<f64>()
                * (0..kp).map(|m| (j - m) as f64).product::<f64>();
            Some(((i - kx, j - kp), c * f))
        }))
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::from_terms(self.coeffs.iter().chain(&other.coeffs).map(|(k, c)| (*k, *c)))
    }

    pub fn scale(&self, s: impl Into<C64>) -> Self {
        let s = s.into();
        Self::from_terms(self.coeffs.iter().map(|(k, c)| (*k, c * s)))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    /// Pointwise (commutative) product.
    pub fn mul(&self, other: &Self) -> Self {
        Self::from_terms(self.coeffs.iter().flat_map(|((i, j), c)| {
            other
                .coeffs
                .iter()
                .map(move |((k, l), d)| ((i + k, j + l), c * d))
        }))
    }

    pub fn conj(&self) -> Self {
        Self::from_terms(self.coeffs.iter().map(|(k, c)| (*k, c.conj())))
    }

    /// Exact Moyal product; the series stops once every bidifferential term
    /// vanishes.
    pub fn star(&self, other: &Self) -> Self {
        let top = self.degree().min(other.degree());
        let mut out = Self::zero();
        for n in 0..=top {
            let pref = C64::new(0.0, 0.5).powu(n as u32) / factorial(n);
            for k in 0..=n {
                let sign = if (n - k) % 2 == 0 { 1.0 } else { -1.0 };
                let a = self.derivative(k, n - k);
                let b = other.derivative(n - k, k);
                if a.is_zero() || b.is_zero() {
                    continue;
                }
                out = out.add(&a.mul(&b).scale(pref * (binomial(n, k) * sign)));
            }
        }
        out
    }

    /// `-i (A ⋆ B - B ⋆ A)`.
    pub fn moyal_bracket(&self, other: &Self) -> Self {
        self.star(other).sub(&other.star(self)).scale(C64::new(0.0, -1.0))
    }

    /// `∂x A ∂p B - ∂p A ∂x B`.
    pub fn poisson_bracket(&self, other: &Self) -> Self {
        self.derivative(1, 0)
            .mul(&other.derivative(0, 1))
            .sub(&self.derivative(0, 1).mul(&other.derivative(1, 0)))
    }

    pub fn to_field(&self, grid: &PhaseSpaceGrid) -> PhaseSpaceField {
        PhaseSpaceField::from_fn(*grid, |x, p| self.eval(x, p))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum XStarPath {
    /// `Σ_{n ≤ N} (i/2)^n/n! a^{(n)}(x) ∂p^n B`.
    #[default]
    Truncated,
    /// All orders at once through the `y` representation of `B`.
    Resummed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StarConfig {
    /// Truncation order `N` for sampled symbols.
    pub order: usize,
    pub scheme: DiffScheme,
    /// Spacings excluded around breakpoints in bulk norms.
    pub margin: usize,
    /// Positions where `x`-stencils must not straddle.
    pub breakpoints: Vec<f64>,
    /// Ratio `ε / η` required for regularized delta symbols.
    pub c: f64,
    pub x_path: XStarPath,
}

impl Default for StarConfig {
    fn default() -> Self {
        Self {
            order: 6,
            scheme: DiffScheme::FiniteDifference,
            margin: crate::quadrature::DEFAULT_MARGIN,
            breakpoints: vec![0.0],
            c: crate::distributions::DEFAULT_C,
            x_path: XStarPath::Truncated,
        }
    }
}

impl StarConfig {
    pub fn validate(&self) -> Result<()> {
        if self.order > MAX_TRUNCATION {
            return Err(Error::UnsupportedOrder {
                order: self.order,
                max: MAX_TRUNCATION,
            });
        }
        if self.c < MIN_C {
            return Err(Error::Config(format!("c = {} is below the minimum {MIN_C}", self.c)));
        }
        Ok(())
    }
}

pub enum Operand {
    Poly(PolynomialSymbol),
    Field(PhaseSpaceField),
}

impl From<PolynomialSymbol> for Operand {
    fn from(p: PolynomialSymbol) -> Self {
        Operand::Poly(p)
    }
}

impl From<PhaseSpaceField> for Operand {
    fn from(f: PhaseSpaceField) -> Self {
        Operand::Field(f)
    }
}

type Samples = Arc<Vec<C64>>;

/// Mixed derivatives `∂x^kx ∂p^kp` of one operand on a grid, memoized.
struct Derivatives<'a> {
    source: Source<'a>,
    grid: PhaseSpaceGrid,
    cfg: &'a StarConfig,
    cache: HashMap<(usize, usize), Option<Samples>>,
}

enum Source<'a> {
    Poly(&'a PolynomialSymbol),
    Field(&'a PhaseSpaceField),
}

impl<'a> Derivatives<'a> {
    fn new(source: Source<'a>, grid: PhaseSpaceGrid, cfg: &'a StarConfig) -> Self {
        Self {
            source,
            grid,
            cfg,
            cache: HashMap::new(),
        }
    }

    /// `None` when the derivative vanishes identically.
    fn get(&mut self, kx: usize, kp: usize) -> Result<Option<Samples>> {
        if let Some(v) = self.cache.get(&(kx, kp)) {
            return Ok(v.clone());
        }
        let v = match self.source {
            Source::Poly(p) => {
                let d = p.derivative(kx, kp);
                if d.is_zero() {
                    None
                } else {
                    Some(Arc::new(d.to_field(&self.grid).values().to_vec()))
                }
            }
            Source::Field(f) => {
                let dp = if kp == 0 {
                    Arc::new(f.values().to_vec())
                } else {
                    Arc::new(diff_p(f.values(), &self.grid, kp, self.cfg.scheme)?)
                };
                let d = if kx == 0 {
                    dp
                } else {
                    Arc::new(diff_x(&dp, &self.grid, kx, self.cfg.scheme, &self.cfg.breakpoints)?)
                };
                Some(d)
            }
        };
        self.cache.insert((kx, kp), v.clone());
        Ok(v)
    }
}

/// `∂p^k` of row-major samples, rows in parallel.
pub fn diff_p(values: &[C64], grid: &PhaseSpaceGrid, k: usize, scheme: DiffScheme) -> Result<Vec<C64>> {
    let np = grid.p.len();
    let d = Differentiator::new(&grid.p, k, scheme)?;
    let mut out = vec![ZERO; values.len()];
    out.par_chunks_mut(np)
        .zip(values.par_chunks(np))
        .try_for_each(|(o, row)| -> Result<()> {
            o.copy_from_slice(&d.apply(row)?);
            Ok(())
        })?;
    Ok(out)
}

/// `∂x^k` of row-major samples, columns in parallel.
pub fn diff_x(
    values: &[C64],
    grid: &PhaseSpaceGrid,
    k: usize,
    scheme: DiffScheme,
    breakpoints: &[f64],
) -> Result<Vec<C64>> {
    let (nx, np) = grid.shape();
    let d = Differentiator::with_breakpoints(&grid.x, k, scheme, breakpoints)?;
    let cols: Vec<Vec<C64>> = (0..np)
        .into_par_iter()
        .map(|j| {
            let col: Vec<C64> = (0..nx).map(|i| values[i * np + j]).collect();
            d.apply(&col)
        })
        .collect::<Result<_>>()?;
    let mut out = vec![ZERO; values.len()];
    for (j, col) in cols.iter().enumerate() {
        for (i, v) in col.iter().enumerate() {
            out[i * np + j] = *v;
        }
    }
    Ok(out)
}

fn star_series(left: &mut Derivatives, right: &mut Derivatives, order: usize) -> Result<Vec<C64>> {
    let len = left.grid.x.len() * left.grid.p.len();
    let mut acc = vec![ZERO; len];
    for n in 0..=order {
        let pref = C64::new(0.0, 0.5).powu(n as u32) / factorial(n);
        for k in 0..=n {
            let Some(a) = left.get(k, n - k)? else { continue };
            let Some(b) = right.get(n - k, k)? else { continue };
            let sign = if (n - k) % 2 == 0 { 1.0 } else { -1.0 };
            let c = pref * (binomial(n, k) * sign);
            acc.par_iter_mut()
                .zip(a.par_iter().zip(b.par_iter()))
                .for_each(|(o, (u, v))| *o += u * v * c);
        }
    }
    Ok(acc)
}

fn relative_change(a: &[C64], b: &[C64]) -> f64 {
    let diff = a.iter().zip(b).fold(0.0f64, |m, (u, v)| m.max((u - v).norm()));
    let scale = b.iter().fold(0.0f64, |m, v| m.max(v.norm()));
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

fn product(a: &Operand, b: &Operand, cfg: &StarConfig) -> Result<PhaseSpaceField> {
    cfg.validate()?;
    let grid = match (a, b) {
        (Operand::Field(f), Operand::Field(g)) => {
            f.check_same_grid(g)?;
            *f.grid()
        }
        (Operand::Field(f), _) | (_, Operand::Field(f)) => *f.grid(),
        (Operand::Poly(_), Operand::Poly(_)) => {
            return Err(Error::Dimension(
                "two polynomial symbols have no grid; use PolynomialSymbol::star".into(),
            ))
        }
    };
    fn source(o: &Operand) -> Source<'_> {
        match o {
            Operand::Poly(p) => Source::Poly(p),
            Operand::Field(f) => Source::Field(f),
        }
    }
    let mut left = Derivatives::new(source(a), grid, cfg);
    let mut right = Derivatives::new(source(b), grid, cfg);
    let poly_degree = match (a, b) {
        (Operand::Poly(p), _) | (_, Operand::Poly(p)) => Some(p.degree()),
        _ => None,
    };
    let mut flags = match (a, b) {
        (Operand::Field(f), _) | (_, Operand::Field(f)) => f.flags.clone(),
        _ => unreachable!(),
    };
    flags.real = false;
    let values = match poly_degree {
        // terminating series: exact beyond the differentiation error of the field
        Some(d) => star_series(&mut left, &mut right, d)?,
        None => {
            let v = star_series(&mut left, &mut right, cfg.order)?;
            let check = (2 * cfg.order).min(MAX_ORDER);
            if check > cfg.order {
                let w = star_series(&mut left, &mut right, check)?;
                flags.unconverged |= relative_change(&v, &w) > CONVERGENCE_TOL;
            } else {
                flags.unconverged = true;
            }
            v
        }
    };
    let mut out = PhaseSpaceField::from_values(grid, values)?;
    out.flags = flags;
    Ok(out)
}

/// `A ⋆ B`.
pub fn star_product(a: &Operand, b: &PhaseSpaceField, cfg: &StarConfig) -> Result<PhaseSpaceField> {
    product(a, &Operand::Field(b.clone()), cfg)
}

/// `B ⋆ A`.
pub fn star_product_right(b: &PhaseSpaceField, a: &Operand, cfg: &StarConfig) -> Result<PhaseSpaceField> {
    product(&Operand::Field(b.clone()), a, cfg)
}

/// `-i (A ⋆ B - B ⋆ A)`.
pub fn moyal_bracket(a: &Operand, b: &PhaseSpaceField, cfg: &StarConfig) -> Result<PhaseSpaceField> {
    let ab = star_product(a, b, cfg)?;
    let ba = star_product_right(b, a, cfg)?;
    let diff = ab.add_scaled(&ba, C64::new(-1.0, 0.0))?;
    let mut out = diff.map(|v| v * C64::new(0.0, -1.0));
    out.flags.unconverged = ab.flags.unconverged || ba.flags.unconverged;
    Ok(out)
}

/// A symbol depending on `x` only.
#[derive(Debug, Clone)]
pub enum XSymbol {
    Smooth(ExpPoly),
    /// `coefficient · δ_η^{(k)}(x - location)`.
    Delta {
        rd: RegularizedDelta,
        location: f64,
        coefficient: C64,
    },
    /// Regular part exact, every delta term replaced by a kernel of width `eta`.
    Distribution {
        combo: DistributionCombo,
        kernel: Kernel,
        eta: f64,
    },
    /// Samples on the `x` axis of the field grid.
    Sampled(Vec<C64>),
}

impl XSymbol {
    fn width(&self) -> Option<f64> {
        match self {
            XSymbol::Delta { rd, .. } => Some(rd.eta),
            XSymbol::Distribution { combo, eta, .. } if !combo.singular.is_empty() => Some(*eta),
            _ => None,
        }
    }

    /// `a^{(m)}(x)` at an arbitrary point (sampled symbols interpolate).
    fn eval_derivative(&self, x: f64, m: usize, sampled: Option<&SampledSymbol>) -> C64 {
        match self {
            XSymbol::Smooth(f) => f.nth_derivative(m).eval(x),
            XSymbol::Delta {
                rd,
                location,
                coefficient,
            } => coefficient * rd.eval_derivative(x - location, m),
            XSymbol::Distribution { combo, kernel, eta } => {
                let mut v = combo.regular.eval_derivative(x, m);
                for t in &combo.singular {
                    let rd = RegularizedDelta {
                        kernel: *kernel,
                        eta: *eta,
                        side_offset: 0.0,
                        order: t.order,
                    };
                    v += t.coefficient * rd.eval_derivative(x - t.location, m);
                }
                v
            }
            XSymbol::Sampled(_) => sampled.expect("sampled symbol prepared").eval(x, m),
        }
    }
}

/// Derivatives of a sampled `x`-symbol, interpolated between nodes.
struct SampledSymbol {
    grid: Grid1D,
    derivs: Vec<Vec<C64>>,
}

impl SampledSymbol {
    fn new(values: &[C64], grid: &Grid1D, max: usize, scheme: DiffScheme) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Dimension(format!(
                "{} symbol samples on a {}-point grid",
                values.len(),
                grid.len()
            )));
        }
        let derivs = (0..=max)
            .map(|m| Differentiator::new(grid, m, scheme)?.apply(values))
            .collect::<Result<_>>()?;
        Ok(Self { grid: *grid, derivs })
    }

    fn eval(&self, x: f64, m: usize) -> C64 {
        let f = self.grid.fractional_index(x);
        let n = self.grid.len();
        if f < 0.0 || f > (n - 1) as f64 {
            return ZERO;
        }
        let i = (f.floor() as usize).min(n - 2);
        let t = f - i as f64;
        self.derivs[m][i] * (1.0 - t) + self.derivs[m][i + 1] * t
    }
}

fn check_offset(a: &XSymbol, eps: f64, cfg: &StarConfig) -> Result<()> {
    cfg.validate()?;
    if let Some(eta) = a.width() {
        if eps < cfg.c * eta * (1.0 - 1e-12) {
            return Err(Error::RegularizationOrder { eps, eta, c: cfg.c });
        }
    }
    Ok(())
}

/// `a(x) ⋆ B(x - ε, p)` (`right = false`) or `B(x - ε, p) ⋆ a(x)` (`right = true`).
pub fn star_with_x_symbol(
    a: &XSymbol,
    eps: f64,
    b: &PhaseSpaceField,
    cfg: &StarConfig,
) -> Result<PhaseSpaceField> {
    x_symbol_product(a, eps, b, cfg, false)
}

/// `B(x - ε, p) ⋆ a(x)`.
pub fn star_with_x_symbol_right(
    a: &XSymbol,
    eps: f64,
    b: &PhaseSpaceField,
    cfg: &StarConfig,
) -> Result<PhaseSpaceField> {
    x_symbol_product(a, eps, b, cfg, true)
}

fn x_symbol_product(
    a: &XSymbol,
    eps: f64,
    b: &PhaseSpaceField,
    cfg: &StarConfig,
    right: bool,
) -> Result<PhaseSpaceField> {
    check_offset(a, eps, cfg)?;
    let shifted = if eps == 0.0 { b.clone() } else { b.shift_x(eps) };
    match cfg.x_path {
        XStarPath::Truncated => truncated_x_product(a, &shifted, cfg, right),
        XStarPath::Resummed => resummed_x_product(a, &shifted, cfg, right),
    }
}

fn truncated_terms(
    a: &XSymbol,
    b: &PhaseSpaceField,
    cfg: &StarConfig,
    right: bool,
    order: usize,
    sampled: Option<&SampledSymbol>,
) -> Result<Vec<C64>> {
    let grid = *b.grid();
    let (nx, np) = grid.shape();
    let xs = grid.x.points();
    // B ⋆ a(x) carries (-i/2)^n instead of (i/2)^n
    let unit = if right { C64::new(0.0, -0.5) } else { C64::new(0.0, 0.5) };
    let mut acc = vec![ZERO; nx * np];
    for n in 0..=order {
        let coeffs: Vec<C64> = xs
            .iter()
            .map(|&x| a.eval_derivative(x, n, sampled) * unit.powu(n as u32) / factorial(n))
            .collect();
        if coeffs.iter().all(|c| *c == ZERO) {
            continue;
        }
        let dpb = if n == 0 {
            b.values().to_vec()
        } else {
            diff_p(b.values(), &grid, n, cfg.scheme)?
        };
        acc.par_chunks_mut(np)
            .zip(dpb.par_chunks(np))
            .zip(coeffs.par_iter())
            .for_each(|((o, row), c)| {
                for (u, v) in o.iter_mut().zip(row) {
                    *u += v * c;
                }
            });
    }
    Ok(acc)
}

fn truncated_x_product(
    a: &XSymbol,
    b: &PhaseSpaceField,
    cfg: &StarConfig,
    right: bool,
) -> Result<PhaseSpaceField> {
    let check = (2 * cfg.order).min(MAX_ORDER);
    let sampled = match a {
        XSymbol::Sampled(v) => Some(SampledSymbol::new(v, &b.grid().x, check.max(cfg.order), cfg.scheme)?),
        _ => None,
    };
    let values = truncated_terms(a, b, cfg, right, cfg.order, sampled.as_ref())?;
    let mut flags = b.flags.clone();
    flags.real = false;
    if check > cfg.order {
        let w = truncated_terms(a, b, cfg, right, check, sampled.as_ref())?;
        flags.unconverged |= relative_change(&values, &w) > CONVERGENCE_TOL;
    } else {
        flags.unconverged = true;
    }
    let mut out = PhaseSpaceField::from_values(*b.grid(), values)?;
    out.flags = flags;
    Ok(out)
}

fn resummed_x_product(
    a: &XSymbol,
    b: &PhaseSpaceField,
    cfg: &StarConfig,
    right: bool,
) -> Result<PhaseSpaceField> {
    let grid = *b.grid();
    let dy = grid.y_spacing().ok_or_else(|| {
        Error::Resolution("resummed product needs an FFT momentum lattice centred on p = 0".into())
    })?;
    let (_, np) = grid.shape();
    let sampled = match a {
        XSymbol::Sampled(v) => Some(SampledSymbol::new(v, &grid.x, 0, cfg.scheme)?),
        _ => None,
    };
    let mut planner = FftPlanner::new();
    let forward = planner.plan_fft_forward(np);
    let inverse = planner.plan_fft_inverse(np);
    let half = (np / 2) as f64;
    let dp = grid.dp();
    // (-1)^j modulation maps the centred lattices onto the FFT index range
    let alt = |j: usize| if j % 2 == 0 { 1.0 } else { -1.0 };
    let sign = if right { -0.5 } else { 0.5 };
    let xs = grid.x.points();
    let mut values = b.values().to_vec();
    values
        .par_chunks_mut(np)
        .zip(xs.par_iter())
        .for_each(|(row, &x)| {
            // B̃(x, y_j) = (Δp / 2π) Σ_l e^{i p_l y_j} B(x, p_l)
            for (l, v) in row.iter_mut().enumerate() {
                *v *= alt(l);
            }
            inverse.process(row);
            for (j, v) in row.iter_mut().enumerate() {
                let y = (j as f64 - half) * dy;
                let phase = alt(j) * if (np / 2) % 2 == 0 { 1.0 } else { -1.0 };
                *v *= phase * dp / (2.0 * PI) * a.eval_derivative(x + sign * y, 0, sampled.as_ref());
            }
            // back to momenta: Σ_j Δy e^{-i p_l y_j} (…)
            for (j, v) in row.iter_mut().enumerate() {
                *v *= alt(j);
            }
            forward.process(row);
            let s = if (np / 2) % 2 == 0 { 1.0 } else { -1.0 };
            for (l, v) in row.iter_mut().enumerate() {
                *v *= alt(l) * s * dy;
            }
        });
    let mut out = PhaseSpaceField::from_values(grid, values)?;
    out.flags = b.flags.clone();
    out.flags.real = false;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> PhaseSpaceGrid {
        let x = Grid1D::new(-4.0, 4.0, 129).unwrap();
        PhaseSpaceGrid::fft_lattice(x, 32.0, 128).unwrap()
    }

    fn gaussian_field(g: &PhaseSpaceGrid) -> PhaseSpaceField {
        PhaseSpaceField::from_fn(*g, |x, p| C64::new((-0.5 * x * x - 0.5 * p * p).exp(), 0.0))
    }

    #[test]
    fn canonical_pair() {
        let x = PolynomialSymbol::x();
        let p = PolynomialSymbol::p();
        let xp = x.star(&p);
        assert_eq!(xp.coefficient(1, 1), C64::new(1.0, 0.0));
        assert_eq!(xp.coefficient(0, 0), C64::new(0.0, 0.5));
        assert_eq!(p.star(&x).coefficient(0, 0), C64::new(0.0, -0.5));
        assert_eq!(x.moyal_bracket(&p), PolynomialSymbol::constant(1.0));
        assert_eq!(
            PolynomialSymbol::p_squared().moyal_bracket(&x),
            PolynomialSymbol::monomial(0, 1, -2.0)
        );
    }

    #[test]
    fn degree_two_bracket_is_poisson() {
        let a = PolynomialSymbol::from_terms([((2, 0), C64::new(1.0, 0.0)), ((1, 1), C64::new(0.5, 0.0))]);
        let b = PolynomialSymbol::from_terms([((0, 2), C64::new(2.0, 0.0)), ((1, 0), C64::new(-1.0, 0.0))]);
        assert_eq!(a.moyal_bracket(&b), a.poisson_bracket(&b));
    }

    #[test]
    fn identity_and_bopp_expansion() {
        let g = grid();
        let b = gaussian_field(&g);
        let cfg = StarConfig::default();
        let one = star_product(&PolynomialSymbol::constant(1.0).into(), &b, &cfg).unwrap();
        assert_eq!(one.values(), b.values());

        let h = star_product(&PolynomialSymbol::p_squared().into(), &b, &cfg).unwrap();
        let xs = g.x.points();
        let ps = g.p.points();
        let mut err = 0.0f64;
        for (i, &x) in xs.iter().enumerate().skip(20).take(80) {
            for (j, &p) in ps.iter().enumerate().skip(30).take(60) {
                let f = (-0.5 * x * x - 0.5 * p * p).exp();
                // p² B − i p ∂x B − ¼ ∂x² B
                let expect = C64::new(p * p * f - 0.25 * (x * x - 1.0) * f, p * x * f);
                err = err.max((h.get(i, j) - expect).norm());
            }
        }
        // eighth-order differences at h = 1/16
        assert!(err < 1e-6, "{err}");
    }

    #[test]
    fn termination_is_exact() {
        let g = grid();
        let b = gaussian_field(&g);
        let lo = StarConfig { order: 2, ..StarConfig::default() };
        let hi = StarConfig { order: 8, ..StarConfig::default() };
        let a = star_product(&PolynomialSymbol::p_squared().into(), &b, &lo).unwrap();
        let c = star_product(&PolynomialSymbol::p_squared().into(), &b, &hi).unwrap();
        assert_eq!(a.values(), c.values());
    }

    #[test]
    fn truncation_limit() {
        let cfg = StarConfig { order: 13, ..StarConfig::default() };
        assert!(matches!(cfg.validate(), Err(Error::UnsupportedOrder { .. })));
    }

    #[test]
    fn grids_must_match() {
        let g = grid();
        let other = PhaseSpaceGrid::fft_lattice(Grid1D::new(-4.0, 4.0, 65).unwrap(), 32.0, 128).unwrap();
        let a = gaussian_field(&g);
        let b = gaussian_field(&other);
        assert!(matches!(
            star_product(&a.into(), &b, &StarConfig::default()),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn plane_wave_symbol_shifts_momentum() {
        let g = grid();
        let b = gaussian_field(&g);
        let k = 1.0;
        let a = XSymbol::Smooth(ExpPoly::exp(C64::new(0.0, k)));
        for path in [XStarPath::Truncated, XStarPath::Resummed] {
            let cfg = StarConfig { order: 8, x_path: path, ..StarConfig::default() };
            let r = star_with_x_symbol(&a, 0.0, &b, &cfg).unwrap();
            let mut err = 0.0f64;
            for (i, &x) in g.x.points().iter().enumerate() {
                for (j, &p) in g.p.points().iter().enumerate().skip(20).take(88) {
                    let q = p - 0.5 * k;
                    let expect = C64::from_polar(1.0, k * x) * (-0.5 * x * x - 0.5 * q * q).exp();
                    err = err.max((r.get(i, j) - expect).norm());
                }
            }
            assert!(err < 1e-4, "{path:?}: {err}");
        }
    }

    #[test]
    fn offset_must_dominate_width() {
        let g = grid();
        let b = gaussian_field(&g);
        let rd = RegularizedDelta::new(Kernel::Gaussian, 0.1, 1).unwrap();
        let a = XSymbol::Delta { rd, location: 0.0, coefficient: C64::new(1.0, 0.0) };
        let cfg = StarConfig::default();
        assert!(matches!(
            star_with_x_symbol(&a, 0.2, &b, &cfg),
            Err(Error::RegularizationOrder { .. })
        ));
    }
}
