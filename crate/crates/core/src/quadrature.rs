//! Composite quadrature, momentum tapers and bulk-region masks.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid1D;

/// Grid spacings excluded on each side of a breakpoint when forming bulk norms.
pub const DEFAULT_MARGIN: usize = 8;

/// Fraction of the momentum range (per side) covered by the cosine taper.
pub const DEFAULT_TAPER_FRACTION: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadratureRule {
    #[default]
    Trapezoid,
    Simpson,
}

/// Composite-rule weights for `n` equally spaced samples with spacing `h`.
pub fn weights(n: usize, h: f64, rule: QuadratureRule) -> Vec<f64> {
    let mut w = vec![0.0; n];
    if n == 1 {
        return w;
    }
    match rule {
        QuadratureRule::Trapezoid => {
            w.iter_mut().for_each(|wi| *wi = h);
            w[0] = 0.5 * h;
            w[n - 1] = 0.5 * h;
        }
        QuadratureRule::Simpson => {
            let intervals = n - 1;
            if intervals == 1 {
                return weights(n, h, QuadratureRule::Trapezoid);
            }
            // odd interval count: close with Simpson's 3/8 over the last three
            let simpson_end = if intervals % 2 == 0 { n - 1 } else { n - 4 };
            let mut i = 0;
            while i + 2 <= simpson_end {
                w[i] += h / 3.0;
                w[i + 1] += 4.0 * h / 3.0;
                w[i + 2] += h / 3.0;
                i += 2;
            }
            if simpson_end != n - 1 {
                let s = simpson_end;
                let c = 3.0 * h / 8.0;
                w[s] += c;
                w[s + 1] += 3.0 * c;
                w[s + 2] += 3.0 * c;
                w[s + 3] += c;
            }
        }
    }
    w
}

/// Integral of `values` sampled on `grid`.
pub fn quadrature(values: &[C64], grid: &Grid1D, rule: QuadratureRule) -> Result<C64> {
    if values.len() != grid.len() {
        return Err(Error::Dimension(format!(
            "{} samples on a {}-point grid",
            values.len(),
            grid.len()
        )));
    }
    let w = weights(values.len(), grid.spacing(), rule);
    Ok(values.iter().zip(&w).map(|(v, wi)| v * wi).sum())
}

pub fn quadrature_real(values: &[f64], grid: &Grid1D, rule: QuadratureRule) -> Result<f64> {
    if values.len() != grid.len() {
        return Err(Error::Dimension(format!(
            "{} samples on a {}-point grid",
            values.len(),
            grid.len()
        )));
    }
    let w = weights(values.len(), grid.spacing(), rule);
    Ok(values.iter().zip(&w).map(|(v, wi)| v * wi).sum())
}

/// Window equal to one on the inner part of the grid and rolling off as a
/// raised cosine over the outer `fraction` of points on each side.
pub fn cosine_taper(n: usize, fraction: f64) -> Vec<f64> {
    let ramp = ((n as f64) * fraction).floor() as usize;
    let mut w = vec![1.0; n];
    if ramp == 0 {
        return w;
    }
    for i in 0..ramp {
        // reaches zero at the outermost point
        let s = i as f64 / ramp as f64;
        let v = 0.5 * (1.0 - (std::f64::consts::PI * s).cos());
        w[i] = v;
        w[n - 1 - i] = v;
    }
    w
}

/// Momentum-integration weights: trapezoid times the cosine taper.
pub fn tapered_weights(grid: &Grid1D, fraction: f64) -> Vec<f64> {
    weights(grid.len(), grid.spacing(), QuadratureRule::Trapezoid)
        .into_iter()
        .zip(cosine_taper(grid.len(), fraction))
        .map(|(a, b)| a * b)
        .collect()
}

/// Mask of grid points at least `margin` spacings away from every breakpoint.
pub fn bulk_mask(grid: &Grid1D, breakpoints: &[f64], margin: usize) -> Vec<bool> {
    // relative slack keeps points exactly `margin` spacings away in the bulk
    let cut = margin as f64 * grid.spacing() * (1.0 - 1e-9);
    grid.points()
        .into_iter()
        .map(|x| breakpoints.iter().all(|b| (x - b).abs() >= cut))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn constant_is_exact() {
        let g = Grid1D::new(0.0, 1.0, 101).unwrap();
        let v = vec![C64::new(1.0, 0.0); 101];
        for rule in [QuadratureRule::Trapezoid, QuadratureRule::Simpson] {
            let q = quadrature(&v, &g, rule).unwrap();
            assert!((q.re - 1.0).abs() < 1e-15, "{rule:?}: {q}");
        }
    }

    #[test]
    fn sine_on_half_period() {
        let g = Grid1D::new(0.0, PI, 2049).unwrap();
        let v: Vec<C64> = g.points().iter().map(|x| C64::new(x.sin(), 0.0)).collect();
        let q = quadrature(&v, &g, QuadratureRule::Trapezoid).unwrap();
        assert!((q.re - 2.0).abs() < 1e-6);
        let q = quadrature(&v, &g, QuadratureRule::Simpson).unwrap();
        assert!((q.re - 2.0).abs() < 1e-8, "{}", q.re - 2.0);
    }

    #[test]
    fn odd_integrand_vanishes() {
        let g = Grid1D::new(-1.0, 1.0, 201).unwrap();
        let v: Vec<C64> = g.points().iter().map(|x| C64::new(x.powi(3), 0.0)).collect();
        for rule in [QuadratureRule::Trapezoid, QuadratureRule::Simpson] {
            assert!(quadrature(&v, &g, rule).unwrap().norm() < 1e-14);
        }
    }

    #[test]
    fn simpson_with_odd_interval_count() {
        let g = Grid1D::new(0.0, 1.0, 100).unwrap();
        let v: Vec<C64> = g.points().iter().map(|x| C64::new(x.powi(3), 0.0)).collect();
        let q = quadrature(&v, &g, QuadratureRule::Simpson).unwrap();
        assert!((q.re - 0.25).abs() < 1e-14);
    }

    #[test]
    fn length_mismatch() {
        let g = Grid1D::new(0.0, 1.0, 10).unwrap();
        assert!(matches!(
            quadrature(&[C64::new(0.0, 0.0); 3], &g, QuadratureRule::Trapezoid),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn taper_shape() {
        let w = cosine_taper(100, 0.1);
        assert_eq!(w[0], 0.0);
        assert_eq!(w[99], 0.0);
        assert!(w[10..90].iter().all(|&v| v == 1.0));
        assert!(w[5] > 0.0 && w[5] < 1.0);
    }

    #[test]
    fn margin_mask() {
        let g = Grid1D::new(-1.0, 1.0, 201).unwrap();
        let m = bulk_mask(&g, &[0.0], 8);
        assert_eq!(m.iter().filter(|b| !**b).count(), 15);
        assert!(!m[100] && m[92] && !m[93]);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn quadrature_is_linear(a in -3.0f64..3.0, b in -3.0f64..3.0, w in 0.5f64..4.0) {
                let g = Grid1D::new(-2.0, 3.0, 257).unwrap();
                let f: Vec<C64> = g.points().iter().map(|x| C64::new((w * x).sin(), x * x)).collect();
                let h: Vec<C64> = g.points().iter().map(|x| C64::new((-x * x).exp(), 0.3 * x)).collect();
                let comb: Vec<C64> = f.iter().zip(&h).map(|(u, v)| u * a + v * b).collect();
                for rule in [QuadratureRule::Trapezoid, QuadratureRule::Simpson] {
                    let lhs = quadrature(&comb, &g, rule).unwrap();
                    let rhs = quadrature(&f, &g, rule).unwrap() * a + quadrature(&h, &g, rule).unwrap() * b;
                    let scale = lhs.norm().max(rhs.norm()).max(1.0);
                    prop_assert!((lhs - rhs).norm() <= 1e-13 * scale);
                }
            }
        }
    }
}
