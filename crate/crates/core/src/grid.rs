//! Uniform grids in position and phase space.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest admissible number of grid points.
pub const MIN_POINTS: usize = 8;

/// Default position window and resolution.
pub const DEFAULT_X_MAX: f64 = 20.0;
pub const DEFAULT_N: usize = 4096;

/// Uniform, endpoint-inclusive grid `x_i = x_min + i * spacing`, `i = 0..n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    x_min: f64,
    x_max: f64,
    n: usize,
}

impl Grid1D {
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite()) || x_min >= x_max {
            return Err(Error::Domain(format!(
                "grid bounds must satisfy x_min < x_max (got {x_min}, {x_max})"
            )));
        }
        if n < MIN_POINTS {
            return Err(Error::Dimension(format!(
                "grid needs at least {MIN_POINTS} points (got {n})"
            )));
        }
        Ok(Self { x_min, x_max, n })
    }

    /// Grid with the given spacing starting at `x_min`.
    pub fn with_spacing(x_min: f64, spacing: f64, n: usize) -> Result<Self> {
        Self::new(x_min, x_min + spacing * (n - 1) as f64, n)
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n - 1) as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.spacing()
    }

    pub fn points(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..self.n).map(|i| self.x_min + i as f64 * h).collect()
    }

    /// Continuous index of `x`, i.e. `(x - x_min) / spacing`.
    pub fn fractional_index(&self, x: f64) -> f64 {
        (x - self.x_min) / self.spacing()
    }

    /// Index of the node at `x`, if `x` sits on one.
    pub fn node_index(&self, x: f64) -> Option<usize> {
        let f = self.fractional_index(x);
        let r = f.round();
        if r >= 0.0 && (r as usize) < self.n && (f - r).abs() < 1e-9 {
            Some(r as usize)
        } else {
            None
        }
    }

    pub fn nearest_index(&self, x: f64) -> usize {
        self.fractional_index(x).round().clamp(0.0, (self.n - 1) as f64) as usize
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.x_min && x <= self.x_max
    }

    /// Lattice of angular wavenumbers matching `rustfft` output order, assuming
    /// the samples are one period of length `n * spacing`.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let n = self.n;
        let dk = 2.0 * PI / (n as f64 * self.spacing());
        (0..n)
            .map(|j| {
                let m = if j <= n / 2 { j as f64 } else { j as f64 - n as f64 };
                m * dk
            })
            .collect()
    }
}

impl Default for Grid1D {
    fn default() -> Self {
        Self {
            x_min: -DEFAULT_X_MAX,
            x_max: DEFAULT_X_MAX,
            n: DEFAULT_N,
        }
    }
}

/// Rectangular `(x, p)` grid. Rows are indexed by `x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseSpaceGrid {
    pub x: Grid1D,
    pub p: Grid1D,
}

impl PhaseSpaceGrid {
    pub fn new(x: Grid1D, p: Grid1D) -> Self {
        Self { x, p }
    }

    /// Momentum grid reciprocal to a `y` window of width `y_span` sampled at
    /// `n_p` points: `dp = 2π / y_span`, `p_j = (j - n_p/2) dp`.
    pub fn fft_lattice(x: Grid1D, y_span: f64, n_p: usize) -> Result<Self> {
        if n_p % 2 != 0 {
            return Err(Error::Dimension(format!(
                "momentum lattice needs an even number of points (got {n_p})"
            )));
        }
        if y_span <= 0.0 {
            return Err(Error::Domain(format!("y span must be positive (got {y_span})")));
        }
        let dp = 2.0 * PI / y_span;
        let p = Grid1D::with_spacing(-((n_p / 2) as f64) * dp, dp, n_p)?;
        Ok(Self { x, p })
    }

    /// `y` sampling step reciprocal to the momentum grid, when the momentum grid
    /// is an FFT lattice centred on `p = 0`.
    pub fn y_spacing(&self) -> Option<f64> {
        let n = self.p.len();
        let dp = self.p.spacing();
        let expected_min = -((n / 2) as f64) * dp;
        if n % 2 == 0 && (self.p.x_min() - expected_min).abs() <= 1e-9 * dp.max(1.0) {
            Some(2.0 * PI / (n as f64 * dp))
        } else {
            None
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.x.len(), self.p.len())
    }

    pub fn dx(&self) -> f64 {
        self.x.spacing()
    }

    pub fn dp(&self) -> f64 {
        self.p.spacing()
    }
}

impl Default for PhaseSpaceGrid {
    /// `x ∈ [-20, 20]` on 1024 rows; 2048 momenta reciprocal to a `y` window of 80,
    /// enough to hold `x ± y/2` for every pair of points in the box.
    fn default() -> Self {
        let x = Grid1D::new(-DEFAULT_X_MAX, DEFAULT_X_MAX, 1024).expect("static grid");
        Self::fft_lattice(x, 4.0 * DEFAULT_X_MAX, 2048).expect("static grid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_bounds_and_sizes() {
        assert!(Grid1D::new(1.0, 1.0, 16).is_err());
        assert!(Grid1D::new(2.0, 1.0, 16).is_err());
        assert!(matches!(Grid1D::new(0.0, 1.0, 4), Err(Error::Dimension(_))));
    }

    #[test]
    fn nodes_are_reconstructible() {
        let g = Grid1D::new(-1.0, 1.0, 101).unwrap();
        assert!((g.spacing() - 0.02).abs() < 1e-15);
        assert_eq!(g.node_index(0.0), Some(50));
        assert_eq!(g.node_index(0.011), None);
        assert_eq!(g.nearest_index(0.011), 51);
        assert!((g.point(100) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn fft_lattice_round_trip() {
        let x = Grid1D::new(-5.0, 5.0, 64).unwrap();
        let ps = PhaseSpaceGrid::fft_lattice(x, 20.0, 256).unwrap();
        let dy = ps.y_spacing().unwrap();
        assert!((dy * 256.0 - 20.0).abs() < 1e-12);
        assert_eq!(ps.p.node_index(0.0), Some(128));

        let off = PhaseSpaceGrid::new(x, Grid1D::new(-3.0, 5.0, 256).unwrap());
        assert!(off.y_spacing().is_none());
    }
}
