//! Spectral and finite-difference differentiation on uniform grids.

use std::sync::Arc;

use num_complex::Complex64 as C64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid1D;

pub const MAX_ORDER: usize = 8;

/// Formal accuracy of the centred finite-difference stencils.
pub const FD_ACCURACY: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiffScheme {
    /// Fourier differentiation; samples are one period of length `n * spacing`.
    Spectral,
    #[default]
    FiniteDifference,
}

/// Fornberg's recursion: weights of derivatives `0..=m` at `z` for the nodes `x`.
/// Returns `w[k][j]`, the weight of node `j` for derivative order `k`.
pub fn fornberg_weights(z: f64, x: &[f64], m: usize) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut c = vec![vec![0.0; n]; m + 1];
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

fn stencil_width(order: usize) -> usize {
    (2 * order.div_ceil(2) + FD_ACCURACY).saturating_sub(1)
}

/// Finite-difference stencils for one derivative order on one contiguous
/// segment: a centred interior stencil and shifted stencils near both ends.
#[derive(Debug, Clone)]
struct FdStencil {
    width: usize,
    interior: Vec<f64>,
    // stencils for the first `half` and last `half` points; node offsets start
    // at the segment edge
    head: Vec<Vec<f64>>,
    tail: Vec<Vec<f64>>,
}

impl FdStencil {
    fn new(order: usize, h: f64) -> Self {
        let width = stencil_width(order);
        let half = width / 2;
        let scale = h.powi(-(order as i32));
        let nodes: Vec<f64> = (0..width).map(|j| j as f64).collect();
        let row = |z: f64| -> Vec<f64> {
            fornberg_weights(z, &nodes, order)[order]
                .iter()
                .map(|w| w * scale)
                .collect()
        };
        let interior = row(half as f64);
        let head = (0..half).map(|i| row(i as f64)).collect();
        let tail = (0..half).map(|i| row((width - half + i) as f64)).collect();
        Self {
            width,
            interior,
            head,
            tail,
        }
    }

    fn apply(&self, v: &[C64], out: &mut [C64]) {
        let n = v.len();
        let w = self.width;
        let half = w / 2;
        let dot = |start: usize, wts: &[f64]| -> C64 {
            v[start..start + w]
                .iter()
                .zip(wts)
                .map(|(a, b)| a * b)
                .sum()
        };
        for (i, o) in out.iter_mut().enumerate() {
            *o = if i < half {
                dot(0, &self.head[i])
            } else if i + half >= n {
                dot(n - w, &self.tail[i + half - n])
            } else {
                dot(i - half, &self.interior)
            };
        }
    }
}

/// Reusable differentiation operator for a fixed grid, order and scheme.
#[derive(Clone)]
pub struct Differentiator {
    n: usize,
    order: usize,
    kind: Kind,
}

#[derive(Clone)]
enum Kind {
    Spectral {
        multipliers: Vec<C64>,
        forward: Arc<dyn Fft<f64>>,
        inverse: Arc<dyn Fft<f64>>,
    },
    Fd {
        stencil: FdStencil,
        // segment boundaries; consecutive segments share their end node
        segments: Vec<(usize, usize)>,
    },
}

impl Differentiator {
    pub fn new(grid: &Grid1D, order: usize, scheme: DiffScheme) -> Result<Self> {
        Self::with_breakpoints(grid, order, scheme, &[])
    }

    /// Finite-difference stencils never straddle a breakpoint; the
    /// breakpoint node itself takes its value from the left segment.
    pub fn with_breakpoints(
        grid: &Grid1D,
        order: usize,
        scheme: DiffScheme,
        breakpoints: &[f64],
    ) -> Result<Self> {
        if order > MAX_ORDER {
            return Err(Error::UnsupportedOrder {
                order,
                max: MAX_ORDER,
            });
        }
        let n = grid.len();
        let kind = match scheme {
            DiffScheme::Spectral => {
                let mut planner = FftPlanner::new();
                let k = grid.wavenumbers();
                let multipliers = k
                    .iter()
                    .enumerate()
                    .map(|(j, &kj)| {
                        if order % 2 == 1 && n % 2 == 0 && j == n / 2 {
                            C64::new(0.0, 0.0)
                        } else {
                            C64::new(0.0, kj).powu(order as u32) / n as f64
                        }
                    })
                    .collect();
                Kind::Spectral {
                    multipliers,
                    forward: planner.plan_fft_forward(n),
                    inverse: planner.plan_fft_inverse(n),
                }
            }
            DiffScheme::FiniteDifference => {
                let stencil = FdStencil::new(order, grid.spacing());
                let mut cuts: Vec<usize> = breakpoints
                    .iter()
                    .filter(|b| b.is_finite() && **b > grid.x_min() && **b < grid.x_max())
                    .map(|b| grid.fractional_index(*b).round() as usize)
                    .collect();
                cuts.sort_unstable();
                cuts.dedup();
                let mut segments = Vec::new();
                let mut start = 0;
                for c in cuts {
                    segments.push((start, c));
                    start = c;
                }
                segments.push((start, n - 1));
                for &(a, b) in &segments {
                    if b + 1 - a < stencil.width {
                        return Err(Error::Dimension(format!(
                            "segment of {} points is shorter than the {}-point stencil",
                            b + 1 - a,
                            stencil.width
                        )));
                    }
                }
                Kind::Fd { stencil, segments }
            }
        };
        Ok(Self { n, order, kind })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn apply(&self, values: &[C64]) -> Result<Vec<C64>> {
        if values.len() != self.n {
            return Err(Error::Dimension(format!(
                "{} samples for a {}-point differentiator",
                values.len(),
                self.n
            )));
        }
        if self.order == 0 {
            return Ok(values.to_vec());
        }
        let mut out = vec![C64::new(0.0, 0.0); self.n];
        match &self.kind {
            Kind::Spectral {
                multipliers,
                forward,
                inverse,
            } => {
                out.copy_from_slice(values);
                forward.process(&mut out);
                out.iter_mut().zip(multipliers).for_each(|(o, m)| *o *= m);
                inverse.process(&mut out);
            }
            Kind::Fd { stencil, segments } => {
                // right to left so the shared node keeps the left segment's value
                for &(a, b) in segments.iter().rev() {
                    stencil.apply(&values[a..=b], &mut out[a..=b]);
                }
            }
        }
        Ok(out)
    }
}

/// `order`-th derivative of `values` sampled on `grid`.
pub fn derivative(
    values: &[C64],
    grid: &Grid1D,
    order: usize,
    scheme: DiffScheme,
) -> Result<Vec<C64>> {
    Differentiator::new(grid, order, scheme)?.apply(values)
}
