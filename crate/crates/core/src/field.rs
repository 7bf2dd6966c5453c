//! Sampled wavefunctions and phase-space fields, with their file formats.

use std::fmt;
use std::io::{BufRead, Write};
use std::sync::Arc;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid1D, PhaseSpaceGrid};
use crate::quadrature::{quadrature, QuadratureRule};

pub type Evaluator = Arc<dyn Fn(f64) -> C64 + Send + Sync>;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Four-point Lagrange interpolation of `values` at fractional index `f`.
/// Points outside the sampled range evaluate to zero.
fn cubic_at(values: &[C64], f: f64) -> C64 {
    let n = values.len();
    if f < 0.0 || f > (n - 1) as f64 {
        return ZERO;
    }
    let i = f.floor() as isize;
    let t = f - i as f64;
    if t == 0.0 {
        return values[i as usize];
    }
    let base = (i - 1).clamp(0, n as isize - 4) as usize;
    let s = f - base as f64;
    let mut acc = ZERO;
    for j in 0..4 {
        let mut w = 1.0;
        for m in 0..4 {
            if m != j {
                w *= (s - m as f64) / (j as f64 - m as f64);
            }
        }
        acc += values[base + j] * w;
    }
    acc
}

#[derive(Clone)]
pub struct Wavefunction {
    grid: Grid1D,
    values: Vec<C64>,
    analytic: Option<Evaluator>,
}

impl fmt::Debug for Wavefunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Wavefunction")
            .field("grid", &self.grid)
            .field("len", &self.values.len())
            .field("analytic", &self.analytic.is_some())
            .finish()
    }
}

impl Wavefunction {
    pub fn new(grid: Grid1D, values: Vec<C64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Dimension(format!(
                "{} samples on a {}-point grid",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self {
            grid,
            values,
            analytic: None,
        })
    }

    /// Samples `f` on the grid and keeps `f` as the exact evaluator.
    pub fn from_fn(grid: Grid1D, f: impl Fn(f64) -> C64 + Send + Sync + 'static) -> Self {
        let values = grid.points().into_iter().map(&f).collect();
        Self {
            grid,
            values,
            analytic: Some(Arc::new(f)),
        }
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn analytic(&self) -> Option<&Evaluator> {
        self.analytic.as_ref()
    }

    pub fn has_analytic(&self) -> bool {
        self.analytic.is_some()
    }

    /// Exact value when an evaluator is attached, otherwise cubic interpolation
    /// of the samples (zero outside the grid).
    pub fn value_at(&self, x: f64) -> C64 {
        match &self.analytic {
            Some(f) => f(x),
            None => cubic_at(&self.values, self.grid.fractional_index(x)),
        }
    }

    pub fn edge_amplitude(&self) -> f64 {
        self.values[0].norm().max(self.values[self.values.len() - 1].norm())
    }

    pub fn norm_sqr(&self) -> f64 {
        let dens: Vec<C64> = self.values.iter().map(|v| C64::new(v.norm_sqr(), 0.0)).collect();
        quadrature(&dens, &self.grid, QuadratureRule::Simpson)
            .expect("lengths match by construction")
            .re
    }

    pub fn scaled(&self, c: C64) -> Self {
        let analytic = self.analytic.clone().map(|f| {
            let g: Evaluator = Arc::new(move |x| f(x) * c);
            g
        });
        Self {
            grid: self.grid,
            values: self.values.iter().map(|v| v * c).collect(),
            analytic,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FieldFlags {
    /// Field is real up to round-off (Wigner transform of a single state).
    pub real: bool,
    /// The source state did not decay at the ends of its grid.
    pub truncation_warning: bool,
    /// A truncated series did not pass its doubling test.
    pub unconverged: bool,
    /// Rows that could not be computed (left as zero).
    pub invalid_rows: Vec<usize>,
}

/// Samples of `F(x, p)`, row-major with one row per `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSpaceField {
    grid: PhaseSpaceGrid,
    values: Vec<C64>,
    pub flags: FieldFlags,
}

/// Header of the binary dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinaryHeader {
    pub x_min: f64,
    pub x_max: f64,
    pub nx: usize,
    pub p_min: f64,
    pub p_max: f64,
    pub np: usize,
}

impl PhaseSpaceField {
    pub fn zeros(grid: PhaseSpaceGrid) -> Self {
        let (nx, np) = grid.shape();
        Self {
            grid,
            values: vec![ZERO; nx * np],
            flags: FieldFlags::default(),
        }
    }

    pub fn from_values(grid: PhaseSpaceGrid, values: Vec<C64>) -> Result<Self> {
        let (nx, np) = grid.shape();
        if values.len() != nx * np {
            return Err(Error::Dimension(format!(
                "{} values for a {nx}x{np} grid",
                values.len()
            )));
        }
        Ok(Self {
            grid,
            values,
            flags: FieldFlags::default(),
        })
    }

    pub fn from_fn(grid: PhaseSpaceGrid, f: impl Fn(f64, f64) -> C64 + Sync) -> Self {
        let xs = grid.x.points();
        let ps = grid.p.points();
        let np = ps.len();
        let mut values = vec![ZERO; xs.len() * np];
        values
            .par_chunks_mut(np)
            .zip(xs.par_iter())
            .for_each(|(row, &x)| {
                for (v, &p) in row.iter_mut().zip(&ps) {
                    *v = f(x, p);
                }
            });
        Self {
            grid,
            values,
            flags: FieldFlags::default(),
        }
    }

    pub fn from_rows(grid: PhaseSpaceGrid, rows: Vec<Vec<C64>>) -> Result<Self> {
        let (nx, np) = grid.shape();
        if rows.len() != nx || rows.iter().any(|r| r.len() != np) {
            return Err(Error::Dimension("row layout does not match the grid".into()));
        }
        Self::from_values(grid, rows.concat())
    }

    pub fn grid(&self) -> &PhaseSpaceGrid {
        &self.grid
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [C64] {
        &mut self.values
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.values[i * self.grid.p.len() + j]
    }

    pub fn row(&self, i: usize) -> &[C64] {
        let np = self.grid.p.len();
        &self.values[i * np..(i + 1) * np]
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        let np = self.grid.p.len();
        (0..self.grid.x.len()).map(|i| self.values[i * np + j]).collect()
    }

    pub fn check_same_grid(&self, other: &PhaseSpaceField) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::Dimension("phase-space grids differ".into()));
        }
        Ok(())
    }

    pub fn map(&self, f: impl Fn(C64) -> C64 + Sync) -> Self {
        Self {
            grid: self.grid,
            values: self.values.par_iter().map(|v| f(*v)).collect(),
            flags: self.flags.clone(),
        }
    }

    /// `self + c * other`.
    pub fn add_scaled(&self, other: &PhaseSpaceField, c: C64) -> Result<Self> {
        self.check_same_grid(other)?;
        let mut flags = self.flags.clone();
        flags.real &= other.flags.real && c.im == 0.0;
        flags.truncation_warning |= other.flags.truncation_warning;
        flags.unconverged |= other.flags.unconverged;
        flags.invalid_rows.extend(&other.flags.invalid_rows);
        flags.invalid_rows.sort_unstable();
        flags.invalid_rows.dedup();
        Ok(Self {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b * c)
                .collect(),
            flags,
        })
    }

    pub fn conj(&self) -> Self {
        self.map(|v| v.conj())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    pub fn max_abs_imag(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.im.abs()))
    }

    pub fn max_abs_real(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.re.abs()))
    }

    /// Rows `F(x - eps, p)`. Exact row copies when `eps` is a whole number of
    /// spacings, cubic interpolation in `x` otherwise. Rows whose source lies
    /// outside the grid are zeroed and reported in `flags.invalid_rows`.
    pub fn shift_x(&self, eps: f64) -> Self {
        let (nx, np) = self.grid.shape();
        let h = self.grid.dx();
        let steps = eps / h;
        let whole = (steps - steps.round()).abs() < 1e-9;
        let mut out = Self::zeros(self.grid);
        out.flags = self.flags.clone();
        let mut invalid = Vec::new();
        for i in 0..nx {
            let src = i as f64 - steps;
            if src < -1e-9 || src > (nx - 1) as f64 + 1e-9 {
                invalid.push(i);
                continue;
            }
            let row = &mut out.values[i * np..(i + 1) * np];
            if whole {
                let s = src.round() as usize;
                row.copy_from_slice(&self.values[s * np..(s + 1) * np]);
            } else {
                for (j, v) in row.iter_mut().enumerate() {
                    let col: Vec<C64> = (0..nx).map(|k| self.values[k * np + j]).collect();
                    *v = cubic_at(&col, src);
                }
            }
        }
        out.flags.invalid_rows.extend(invalid);
        out.flags.invalid_rows.sort_unstable();
        out.flags.invalid_rows.dedup();
        out
    }

    /// CSV with columns `x,p,value` for real fields, `x,p,re,im` otherwise.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let xs = self.grid.x.points();
        let ps = self.grid.p.points();
        if self.flags.real {
            writeln!(w, "x,p,value")?;
        } else {
            writeln!(w, "x,p,re,im")?;
        }
        for (i, x) in xs.iter().enumerate() {
            for (j, p) in ps.iter().enumerate() {
                let v = self.get(i, j);
                if self.flags.real {
                    writeln!(w, "{x},{p},{}", v.re)?;
                } else {
                    writeln!(w, "{x},{p},{},{}", v.re, v.im)?;
                }
            }
        }
        Ok(())
    }

    pub fn header(&self) -> BinaryHeader {
        BinaryHeader {
            x_min: self.grid.x.x_min(),
            x_max: self.grid.x.x_max(),
            nx: self.grid.x.len(),
            p_min: self.grid.p.x_min(),
            p_max: self.grid.p.x_max(),
            np: self.grid.p.len(),
        }
    }

    /// One line of JSON header, then `nx * np` little-endian `f64` real parts in
    /// row-major order.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        serde_json::to_writer(&mut w, &self.header())?;
        w.write_all(b"\n")?;
        for v in &self.values {
            w.write_all(&v.re.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: BufRead>(mut r: R) -> Result<(BinaryHeader, Vec<f64>)> {
        let mut line = String::new();
        r.read_line(&mut line)?;
        let header: BinaryHeader = serde_json::from_str(line.trim_end())?;
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        if bytes.len() != header.nx * header.np * 8 {
            return Err(Error::Dimension(format!(
                "binary payload holds {} bytes, header announces {}x{} doubles",
                bytes.len(),
                header.nx,
                header.np
            )));
        }
        let data = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of eight")))
            .collect();
        Ok((header, data))
    }
}
