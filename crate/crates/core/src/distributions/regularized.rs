use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::Side;
use crate::diff::fornberg_weights;
use crate::error::{Error, Result};
use crate::grid::Grid1D;

/// Default ratio `ε / η` for one-sided limits.
pub const DEFAULT_C: f64 = 4.0;

/// Smallest admissible ratio `ε / η`.
pub const MIN_C: f64 = 2.0;

/// Points per width `η` required when sampling a kernel.
pub const POINTS_PER_WIDTH: f64 = 16.0;

/// `∫_{-1}^{1} exp(-1/(1 - z²)) dz`.
const BUMP_NORM: f64 = 0.443_993_816_168_079_4;

/// Half-width of the gaussian support used for quadrature, in units of `η`.
const GAUSSIAN_CUTOFF: f64 = 12.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kernel {
    #[default]
    Gaussian,
    /// `exp(-1/(1 - (x/η)²))`, supported on `|x| < η`.
    Bump,
}

/// `δ_η^{(order)}`, optionally paired with a side offset `ε` applied to the
/// other factor of a product.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegularizedDelta {
    pub kernel: Kernel,
    pub eta: f64,
    pub side_offset: f64,
    pub order: usize,
}

fn hermite(n: usize, z: f64) -> f64 {
    // probabilists' Hermite polynomials
    let (mut h0, mut h1) = (1.0, z);
    if n == 0 {
        return h0;
    }
    for k in 1..n {
        let h2 = z * h1 - k as f64 * h0;
        h0 = h1;
        h1 = h2;
    }
    h1
}

/// Polynomials `P_n` with `b^{(n)}(z) = P_n(z) b(z) / (1 - z²)^{2n}`.
fn bump_polys(n: usize) -> Vec<Vec<f64>> {
    let mut out = vec![vec![1.0]];
    for k in 0..n {
        let p = &out[k];
        let mut next = vec![0.0; p.len() + 3];
        // u² P'
        let u2 = [1.0, 0.0, -2.0, 0.0, 1.0];
        for (i, c) in p.iter().enumerate().skip(1) {
            for (j, u) in u2.iter().enumerate() {
                if i - 1 + j < next.len() {
                    next[i - 1 + j] += c * i as f64 * u;
                }
            }
        }
        for (i, c) in p.iter().enumerate() {
            // - 2 z P
            next[i + 1] -= 2.0 * c;
            // + 4 k z u P = 4k (z - z³) P
            next[i + 1] += 4.0 * k as f64 * c;
            next[i + 3] -= 4.0 * k as f64 * c;
        }
        while next.len() > 1 && next.last() == Some(&0.0) {
            next.pop();
        }
        out.push(next);
    }
    out
}

impl RegularizedDelta {
    pub fn new(kernel: Kernel, eta: f64, order: usize) -> Result<Self> {
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::Domain(format!("kernel width must be positive (got {eta})")));
        }
        Ok(Self {
            kernel,
            eta,
            side_offset: 0.0,
            order,
        })
    }

    /// Kernel with side offset `ε = c η`, rejecting `c < 2`.
    pub fn one_sided(kernel: Kernel, eta: f64, c: f64, order: usize) -> Result<Self> {
        let rd = Self::new(kernel, eta, order)?;
        rd.with_offset(c * eta, MIN_C)
    }

    /// Attaches an explicit offset, checking `ε >= c_min η`.
    pub fn with_offset(mut self, eps: f64, c_min: f64) -> Result<Self> {
        if eps < c_min * self.eta * (1.0 - 1e-12) || c_min < MIN_C {
            return Err(Error::RegularizationOrder {
                eps,
                eta: self.eta,
                c: c_min.max(MIN_C),
            });
        }
        self.side_offset = eps;
        Ok(self)
    }

    /// Half-width of the region where the kernel is numerically nonzero.
    pub fn support_radius(&self) -> f64 {
        match self.kernel {
            Kernel::Gaussian => GAUSSIAN_CUTOFF * self.eta,
            Kernel::Bump => self.eta,
        }
    }

    /// `δ_η^{(order + extra)}(x)`.
    pub fn eval_derivative(&self, x: f64, extra: usize) -> f64 {
        let n = self.order + extra;
        let eta = self.eta;
        let z = x / eta;
        match self.kernel {
            Kernel::Gaussian => {
                let g = (-0.5 * z * z).exp() / (eta * (2.0 * PI).sqrt());
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                sign * hermite(n, z) * g / eta.powi(n as i32)
            }
            Kernel::Bump => {
                if z.abs() >= 1.0 {
                    return 0.0;
                }
                let u = 1.0 - z * z;
                let b = (-1.0 / u).exp();
                if b == 0.0 {
                    return 0.0;
                }
                let p = &bump_polys(n)[n];
                let pv = p.iter().rev().fold(0.0, |acc, c| acc * z + c);
                pv * b / u.powi(2 * n as i32) / (BUMP_NORM * eta.powi(n as i32 + 1))
            }
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.eval_derivative(x, 0)
    }

    /// `(δ_η^{(order)}, δ_η^{(order+1)}, …, δ_η^{(order+extra)})` at `x`.
    pub fn eval_derivatives(&self, x: f64, extra: usize) -> Vec<f64> {
        match self.kernel {
            Kernel::Gaussian => (0..=extra).map(|m| self.eval_derivative(x, m)).collect(),
            Kernel::Bump => {
                let z = x / self.eta;
                if z.abs() >= 1.0 {
                    return vec![0.0; extra + 1];
                }
                let u = 1.0 - z * z;
                let b = (-1.0 / u).exp();
                let polys = bump_polys(self.order + extra);
                (self.order..=self.order + extra)
                    .map(|n| {
                        let pv = polys[n].iter().rev().fold(0.0, |acc, c| acc * z + c);
                        pv * b / u.powi(2 * n as i32) / (BUMP_NORM * self.eta.powi(n as i32 + 1))
                    })
                    .collect()
            }
        }
    }

    /// `∫ δ_η^{(order)}(x - a) g(x) dx` by trapezoid over the kernel support.
    pub fn pair_with(&self, a: f64, g: impl Fn(f64) -> C64, points: usize) -> C64 {
        let r = self.support_radius();
        let n = points.max(64);
        let h = 2.0 * r / (n - 1) as f64;
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..n {
            let y = -r + i as f64 * h;
            let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
            acc += g(a + y) * (w * self.eval(y));
        }
        acc * h
    }
}

/// Samples `δ_η^{(order)}(x_i)` on `grid`; the grid must place at least 16
/// points per width.
pub fn regularized_delta_sample(rd: &RegularizedDelta, grid: &Grid1D) -> Result<Vec<f64>> {
    if grid.spacing() > rd.eta / POINTS_PER_WIDTH {
        return Err(Error::Resolution(format!(
            "spacing {} exceeds eta/16 = {}",
            grid.spacing(),
            rd.eta / POINTS_PER_WIDTH
        )));
    }
    Ok(grid.points().into_iter().map(|x| rd.eval(x)).collect())
}

/// Richardson extrapolation of values computed at `h, h/2, h/4, …` for an
/// expansion in integer powers of `h`. Returns the extrapolated value and the
/// magnitude of the last correction.
pub fn richardson(values: &[C64]) -> (C64, f64) {
    let mut t = values.to_vec();
    let mut last = f64::INFINITY;
    for level in 1..values.len() {
        let f = 2f64.powi(level as i32);
        let next: Vec<C64> = t.windows(2).map(|w| (w[1] * f - w[0]) / (f - 1.0)).collect();
        last = (next[next.len() - 1] - t[t.len() - 1]).norm();
        t = next;
    }
    (t[0], last)
}

/// One-sided derivatives estimated from samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OneSidedEstimate {
    pub values: Vec<C64>,
    pub error_estimate: f64,
    /// `false` when the two stencil widths disagree by more than `1e-6` relative.
    pub accurate: bool,
}

/// Estimates `f^{(j)}(a±)`, `j = 0..=order`, from samples with one-sided
/// stencils that never cross `a`. The error estimate compares two stencil widths.
pub fn one_sided_from_samples(
    values: &[C64],
    grid: &Grid1D,
    a: f64,
    side: Side,
    order: usize,
) -> Result<OneSidedEstimate> {
    let Some(i0) = grid.node_index(a) else {
        return Err(Error::Domain(format!("{a} is not a grid node")));
    };
    let estimate = |width: usize| -> Result<Vec<C64>> {
        let idx: Vec<usize> = match side {
            Side::Minus => {
                if i0 + 1 < width {
                    return Err(Error::Dimension("not enough samples left of the point".into()));
                }
                (0..width).map(|k| i0 - k).collect()
            }
            Side::Plus => {
                if i0 + width > values.len() {
                    return Err(Error::Dimension("not enough samples right of the point".into()));
                }
                (0..width).map(|k| i0 + k).collect()
            }
        };
        let xs: Vec<f64> = idx.iter().map(|&i| grid.point(i)).collect();
        let w = fornberg_weights(a, &xs, order);
        Ok((0..=order)
            .map(|m| idx.iter().zip(&w[m]).map(|(&i, c)| values[i] * c).sum())
            .collect())
    };
    let fine = estimate(order + 8)?;
    let coarse = estimate(order + 6)?;
    let error_estimate = fine
        .iter()
        .zip(&coarse)
        .map(|(u, v)| (u - v).norm() / u.norm().max(1.0))
        .fold(0.0, f64::max);
    Ok(OneSidedEstimate {
        values: fine,
        error_estimate,
        accurate: error_estimate < 1e-6,
    })
}
