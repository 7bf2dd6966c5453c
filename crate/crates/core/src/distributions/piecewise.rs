use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::Side;
use crate::error::{Error, Result};
use crate::expfn::ExpPoly;
use crate::quadrature::{weights, QuadratureRule};

/// Relative tolerance used to decide whether one-sided limits agree.
pub const MATCH_TOL: f64 = 1e-12;

/// Default number of derivatives carried with each piece.
pub const DEFAULT_N_MAX: usize = 8;

/// A function that is smooth away from finitely many breakpoints. Piece `i`
/// lives on `(b_{i-1}, b_i)` with `b_{-1} = -∞` and `b_len = +∞`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseSmooth {
    breakpoints: Vec<f64>,
    pieces: Vec<ExpPoly>,
    n_max: usize,
}

pub(crate) fn values_match(a: C64, b: C64) -> bool {
    (a - b).norm() <= MATCH_TOL * a.norm().max(b.norm()).max(1.0)
}

impl PiecewiseSmooth {
    pub fn new(breakpoints: Vec<f64>, pieces: Vec<ExpPoly>, n_max: usize) -> Result<Self> {
        if pieces.len() != breakpoints.len() + 1 {
            return Err(Error::Dimension(format!(
                "{} breakpoints need {} pieces, got {}",
                breakpoints.len(),
                breakpoints.len() + 1,
                pieces.len()
            )));
        }
        if breakpoints.iter().any(|b| !b.is_finite()) || breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Domain("breakpoints must be finite and strictly increasing".into()));
        }
        Ok(Self {
            breakpoints,
            pieces,
            n_max,
        })
    }

    pub fn zero() -> Self {
        Self::smooth(ExpPoly::zero(), DEFAULT_N_MAX)
    }

    pub fn smooth(f: ExpPoly, n_max: usize) -> Self {
        Self {
            breakpoints: Vec::new(),
            pieces: vec![f],
            n_max,
        }
    }

    /// `θ(a - x) φ(x)`.
    pub fn heaviside_left(a: f64, phi: ExpPoly, n_max: usize) -> Self {
        Self {
            breakpoints: vec![a],
            pieces: vec![phi, ExpPoly::zero()],
            n_max,
        }
    }

    /// `θ(x - a) φ(x)`.
    pub fn heaviside_right(a: f64, phi: ExpPoly, n_max: usize) -> Self {
        Self {
            breakpoints: vec![a],
            pieces: vec![ExpPoly::zero(), phi],
            n_max,
        }
    }

    /// The unit step `θ(x)`.
    pub fn theta(n_max: usize) -> Self {
        Self::heaviside_right(0.0, ExpPoly::constant(1.0), n_max)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn pieces(&self) -> &[ExpPoly] {
        &self.pieces
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn with_n_max(mut self, n_max: usize) -> Self {
        self.n_max = n_max;
        self
    }

    pub fn is_zero(&self) -> bool {
        self.pieces.iter().all(ExpPoly::is_zero)
    }

    /// Drops breakpoints across which both pieces are the same expression.
    pub fn simplified(mut self) -> Self {
        let mut bps = Vec::with_capacity(self.breakpoints.len());
        let mut pieces: Vec<ExpPoly> = Vec::with_capacity(self.pieces.len());
        let mut rest = self.pieces.into_iter();
        pieces.extend(rest.next());
        for (b, p) in self.breakpoints.into_iter().zip(rest) {
            let last = pieces.last().expect("at least one piece");
            if (last.clone() - p.clone()).is_zero() {
                continue;
            }
            bps.push(b);
            pieces.push(p);
        }
        self.breakpoints = bps;
        self.pieces = pieces;
        self
    }

    /// Piece used at `x`; a breakpoint belongs to the piece on its left.
    pub fn piece_index(&self, x: f64) -> usize {
        self.breakpoints.partition_point(|b| *b < x)
    }

    pub fn piece_at(&self, x: f64) -> &ExpPoly {
        &self.pieces[self.piece_index(x)]
    }

    pub fn eval(&self, x: f64) -> C64 {
        self.piece_at(x).eval(x)
    }

    pub fn eval_derivative(&self, x: f64, m: usize) -> C64 {
        self.piece_at(x).nth_derivative(m).eval(x)
    }

    /// One-sided values `f^{(j)}(a±)` for `j = 0..=order`.
    pub fn one_sided(&self, a: f64, side: Side, order: usize) -> Result<Vec<C64>> {
        if order > self.n_max {
            return Err(Error::InsufficientOrder {
                requested: order,
                available: self.n_max,
            });
        }
        let left = self.breakpoints.partition_point(|b| *b < a);
        let idx = match side {
            Side::Minus => left,
            Side::Plus => self.breakpoints.partition_point(|b| *b <= a),
        };
        Ok(self.pieces[idx].taylor_data(a, order))
    }

    /// Breakpoints where some derivative of order `<= n` jumps.
    pub fn special_support(&self, n: usize) -> Result<Vec<f64>> {
        if n > self.n_max {
            return Err(Error::InsufficientOrder {
                requested: n,
                available: self.n_max,
            });
        }
        let mut out = Vec::new();
        for &b in &self.breakpoints {
            let l = self.one_sided(b, Side::Minus, n)?;
            let r = self.one_sided(b, Side::Plus, n)?;
            if l.iter().zip(&r).any(|(u, v)| !values_match(*u, *v)) {
                out.push(b);
            }
        }
        Ok(out)
    }

    /// Jumps `f(b+) - f(b-)` at each breakpoint.
    pub fn jumps(&self) -> Vec<(f64, C64)> {
        self.breakpoints
            .iter()
            .enumerate()
            .map(|(i, &b)| (b, self.pieces[i + 1].eval(b) - self.pieces[i].eval(b)))
            .collect()
    }

    /// Piecewise classical derivative (jumps are not included).
    pub fn classical_derivative(&self) -> Self {
        Self {
            breakpoints: self.breakpoints.clone(),
            pieces: self.pieces.iter().map(ExpPoly::derivative).collect(),
            n_max: self.n_max.saturating_sub(1),
        }
    }

    pub fn scale(&self, c: C64) -> Self {
        Self {
            breakpoints: self.breakpoints.clone(),
            pieces: self.pieces.iter().map(|p| p.clone() * c).collect(),
            n_max: self.n_max,
        }
    }

    /// `f(x - s)`.
    pub fn shifted(&self, s: f64) -> Self {
        Self {
            breakpoints: self.breakpoints.iter().map(|b| b + s).collect(),
            pieces: self.pieces.iter().map(|p| p.shifted(s)).collect(),
            n_max: self.n_max,
        }
    }

    pub fn conj(&self) -> Self {
        Self {
            breakpoints: self.breakpoints.clone(),
            pieces: self.pieces.iter().map(ExpPoly::conj).collect(),
            n_max: self.n_max,
        }
    }

    /// Re-expresses the function on a finer breakpoint set.
    fn refine(&self, breakpoints: &[f64]) -> Vec<ExpPoly> {
        let mut pieces = Vec::with_capacity(breakpoints.len() + 1);
        for i in 0..=breakpoints.len() {
            let probe = match (i.checked_sub(1).map(|j| breakpoints[j]), breakpoints.get(i)) {
                (None, None) => 0.0,
                (None, Some(&hi)) => hi - 1.0,
                (Some(lo), None) => lo + 1.0,
                (Some(lo), Some(&hi)) => 0.5 * (lo + hi),
            };
            pieces.push(self.pieces[self.piece_index(probe)].clone());
        }
        pieces
    }

    /// Sum on the union of both breakpoint sets. Breakpoints across which the
    /// sum turns out to be a single expression are kept.
    pub fn add(&self, other: &Self) -> Self {
        let mut bps: Vec<f64> = self.breakpoints.iter().chain(&other.breakpoints).copied().collect();
        bps.sort_by(f64::total_cmp);
        bps.dedup();
        let pieces = self
            .refine(&bps)
            .into_iter()
            .zip(other.refine(&bps))
            .map(|(a, b)| a + b)
            .collect();
        Self {
            breakpoints: bps,
            pieces,
            n_max: self.n_max.min(other.n_max),
        }
    }

    /// `f(x) g(x)` with `g` smooth.
    pub fn times(&self, g: &ExpPoly) -> Self {
        Self {
            breakpoints: self.breakpoints.clone(),
            pieces: self.pieces.iter().map(|p| p.clone() * g.clone()).collect(),
            n_max: self.n_max,
        }
    }

    /// `∫_lo^hi f(x) g(x) dx`, composite Simpson on each smooth stretch.
    pub fn integrate_against(&self, g: &ExpPoly, lo: f64, hi: f64, points_per_unit: usize) -> C64 {
        let mut cuts = vec![lo];
        cuts.extend(self.breakpoints.iter().copied().filter(|b| *b > lo && *b < hi));
        cuts.push(hi);
        let mut total = C64::new(0.0, 0.0);
        for w in cuts.windows(2) {
            let (a, b) = (w[0], w[1]);
            let piece = &self.pieces[self.piece_index(0.5 * (a + b))];
            if piece.is_zero() {
                continue;
            }
            let n = (((b - a) * points_per_unit as f64).ceil() as usize).max(16) | 1;
            let h = (b - a) / (n - 1) as f64;
            let wts = weights(n, h, QuadratureRule::Simpson);
            for (k, wk) in wts.iter().enumerate() {
                let x = a + k as f64 * h;
                total += piece.eval(x) * g.eval(x) * *wk;
            }
        }
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_malformed_layout() {
        assert!(PiecewiseSmooth::new(vec![0.0], vec![ExpPoly::zero()], 2).is_err());
        assert!(PiecewiseSmooth::new(vec![1.0, 0.0], vec![ExpPoly::zero(); 3], 2).is_err());
    }

    #[test]
    fn breakpoint_belongs_to_left_piece() {
        let f = PiecewiseSmooth::theta(2);
        assert_eq!(f.eval(0.0), C64::new(0.0, 0.0));
        assert_eq!(f.eval(1e-12), C64::new(1.0, 0.0));
        let d = f.one_sided(0.0, Side::Plus, 2).unwrap();
        assert_eq!(d[0], C64::new(1.0, 0.0));
    }

    #[test]
    fn special_support_examples() {
        let theta_left = PiecewiseSmooth::heaviside_left(0.0, ExpPoly::constant(1.0), 4);
        assert_eq!(theta_left.special_support(0).unwrap(), vec![0.0]);
        let s = PiecewiseSmooth::heaviside_left(0.0, ExpPoly::sin(1.0), 4);
        assert!(s.special_support(0).unwrap().is_empty());
        assert_eq!(s.special_support(1).unwrap(), vec![0.0]);
        let smooth = PiecewiseSmooth::smooth(ExpPoly::cos(2.0), 4);
        assert!(smooth.special_support(4).unwrap().is_empty());
        assert!(matches!(
            smooth.special_support(5),
            Err(Error::InsufficientOrder { requested: 5, available: 4 })
        ));
    }

    #[test]
    fn sum_on_merged_breakpoints() {
        let a = PiecewiseSmooth::heaviside_left(0.0, ExpPoly::constant(1.0), 4);
        let b = PiecewiseSmooth::heaviside_right(1.0, ExpPoly::x(), 4);
        let s = a.add(&b);
        assert_eq!(s.breakpoints(), &[0.0, 1.0]);
        assert_eq!(s.eval(-1.0), C64::new(1.0, 0.0));
        assert_eq!(s.eval(0.5), C64::new(0.0, 0.0));
        assert_eq!(s.eval(2.0), C64::new(2.0, 0.0));
    }

    #[test]
    fn integral_across_breakpoint() {
        let f = PiecewiseSmooth::heaviside_left(0.0, ExpPoly::sin(1.0), 4);
        // ∫_{-π}^{0} sin x dx = -2
        let v = f.integrate_against(&ExpPoly::constant(1.0), -std::f64::consts::PI, 1.0, 400);
        assert!((v.re + 2.0).abs() < 1e-10, "{v}");
    }
}
