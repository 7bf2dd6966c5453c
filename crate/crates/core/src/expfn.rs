//! Exact elementary functions of the form `Σ P_k(x) exp(a_k x² + b_k x)`.
//!
//! The class is closed under differentiation and multiplication, so every
//! derivative is available exactly. Sines, cosines, exponentials, polynomials
//! and gaussian-modulated combinations of these are all members.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// `P(x) exp(quad x² + lin x)` with `P` given by ascending coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpTerm {
    pub poly: Vec<C64>,
    pub lin: C64,
    pub quad: C64,
}

impl ExpTerm {
    fn eval(&self, x: f64) -> C64 {
        let p = self.poly.iter().rev().fold(ZERO, |acc, c| acc * x + c);
        p * (self.quad * x * x + self.lin * x).exp()
    }

    fn derivative(&self) -> ExpTerm {
        // (P e^q)' = (P' + P q') e^q with q' = 2 quad x + lin
        let n = self.poly.len();
        let mut out = vec![ZERO; n + 1];
        for (k, c) in self.poly.iter().enumerate().skip(1) {
            out[k - 1] += c * k as f64;
        }
        for (k, c) in self.poly.iter().enumerate() {
            out[k] += c * self.lin;
            out[k + 1] += c * self.quad * 2.0;
        }
        ExpTerm {
            poly: trim(out),
            lin: self.lin,
            quad: self.quad,
        }
    }
}

fn trim(mut p: Vec<C64>) -> Vec<C64> {
    while p.last().is_some_and(|c| *c == ZERO) {
        p.pop();
    }
    p
}

fn poly_mul(a: &[C64], b: &[C64]) -> Vec<C64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![ZERO; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    trim(out)
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ExpPoly {
    terms: Vec<ExpTerm>,
}

impl ExpPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: impl Into<C64>) -> Self {
        Self::from_term(vec![c.into()], ZERO, ZERO)
    }

    /// Polynomial with ascending coefficients.
    pub fn polynomial(coeffs: &[f64]) -> Self {
        Self::from_term(coeffs.iter().map(|c| C64::new(*c, 0.0)).collect(), ZERO, ZERO)
    }

    pub fn x() -> Self {
        Self::polynomial(&[0.0, 1.0])
    }

    /// `exp(alpha x)`.
    pub fn exp(alpha: impl Into<C64>) -> Self {
        Self::from_term(vec![ONE], alpha.into(), ZERO)
    }

    pub fn sin(k: f64) -> Self {
        // (e^{ikx} - e^{-ikx}) / 2i
        let half = C64::new(0.0, -0.5);
        Self::exp(C64::new(0.0, k)) * half - Self::exp(C64::new(0.0, -k)) * half
    }

    pub fn cos(k: f64) -> Self {
        (Self::exp(C64::new(0.0, k)) + Self::exp(C64::new(0.0, -k))) * C64::new(0.5, 0.0)
    }

    /// `exp(-(x - center)² / (2 width²))`.
    pub fn gaussian(center: f64, width: f64) -> Self {
        let s = 1.0 / (2.0 * width * width);
        let norm = (-s * center * center).exp();
        Self::from_term(
            vec![C64::new(norm, 0.0)],
            C64::new(2.0 * s * center, 0.0),
            C64::new(-s, 0.0),
        )
    }

    pub fn from_term(poly: Vec<C64>, lin: C64, quad: C64) -> Self {
        let poly = trim(poly);
        if poly.is_empty() {
            return Self::zero();
        }
        Self {
            terms: vec![ExpTerm { poly, lin, quad }],
        }
    }

    pub fn terms(&self) -> &[ExpTerm] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, x: f64) -> C64 {
        self.terms.iter().map(|t| t.eval(x)).sum()
    }

    pub fn derivative(&self) -> Self {
        Self::collect(self.terms.iter().map(ExpTerm::derivative))
    }

    pub fn nth_derivative(&self, n: usize) -> Self {
        (0..n).fold(self.clone(), |f, _| f.derivative())
    }

    /// Values `f(x), f'(x), ..., f^{(n)}(x)`.
    pub fn taylor_data(&self, x: f64, n: usize) -> Vec<C64> {
        let mut f = self.clone();
        let mut out = Vec::with_capacity(n + 1);
        for k in 0..=n {
            out.push(f.eval(x));
            if k < n {
                f = f.derivative();
            }
        }
        out
    }

    /// `f(x - a)`.
    pub fn shifted(&self, a: f64) -> Self {
        Self::collect(self.terms.iter().map(|t| {
            // P(x - a) by Horner on the linear polynomial (x - a)
            let mut p: Vec<C64> = Vec::new();
            for c in t.poly.iter().rev() {
                p = poly_mul(&p, &[C64::new(-a, 0.0), ONE]);
                if p.is_empty() {
                    p.push(*c);
                } else {
                    p[0] += c;
                }
            }
            // quad (x-a)² + lin (x-a) = quad x² + (lin - 2 a quad) x + (quad a² - lin a)
            let factor = (t.quad * a * a - t.lin * a).exp();
            ExpTerm {
                poly: trim(p.into_iter().map(|c| c * factor).collect()),
                lin: t.lin - t.quad * 2.0 * a,
                quad: t.quad,
            }
        }))
    }

    pub fn conj(&self) -> Self {
        Self::collect(self.terms.iter().map(|t| ExpTerm {
            poly: t.poly.iter().map(|c| c.conj()).collect(),
            lin: t.lin.conj(),
            quad: t.quad.conj(),
        }))
    }

    /// Merge terms that share an exponent and drop vanishing ones.
    fn collect(terms: impl IntoIterator<Item = ExpTerm>) -> Self {
        let mut out: Vec<ExpTerm> = Vec::new();
        for t in terms {
            if let Some(existing) = out.iter_mut().find(|e| e.lin == t.lin && e.quad == t.quad) {
                let n = existing.poly.len().max(t.poly.len());
                existing.poly.resize(n, ZERO);
                for (k, c) in t.poly.iter().enumerate() {
                    existing.poly[k] += c;
                }
                existing.poly = trim(std::mem::take(&mut existing.poly));
            } else {
                out.push(t);
            }
        }
        out.retain(|t| !t.poly.is_empty());
        Self { terms: out }
    }
}

impl Add for ExpPoly {
    type Output = ExpPoly;
    fn add(self, rhs: ExpPoly) -> ExpPoly {
        ExpPoly::collect(self.terms.into_iter().chain(rhs.terms))
    }
}

impl Sub for ExpPoly {
    type Output = ExpPoly;
    fn sub(self, rhs: ExpPoly) -> ExpPoly {
        self + (-rhs)
    }
}

impl Neg for ExpPoly {
    type Output = ExpPoly;
    fn neg(self) -> ExpPoly {
        self * C64::new(-1.0, 0.0)
    }
}

impl Mul<C64> for ExpPoly {
    type Output = ExpPoly;
    fn mul(self, rhs: C64) -> ExpPoly {
        ExpPoly::collect(self.terms.into_iter().map(|t| ExpTerm {
            poly: trim(t.poly.into_iter().map(|c| c * rhs).collect()),
            ..t
        }))
    }
}

impl Mul<f64> for ExpPoly {
    type Output = ExpPoly;
    fn mul(self, rhs: f64) -> ExpPoly {
        self * C64::new(rhs, 0.0)
    }
}

impl Mul for ExpPoly {
    type Output = ExpPoly;
    fn mul(self, rhs: ExpPoly) -> ExpPoly {
        let mut terms = Vec::new();
        for a in &self.terms {
            for b in &rhs.terms {
                terms.push(ExpTerm {
                    poly: poly_mul(&a.poly, &b.poly),
                    lin: a.lin + b.lin,
                    quad: a.quad + b.quad,
                });
            }
        }
        ExpPoly::collect(terms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol * b.norm().max(1.0)
    }

    #[test]
    fn trig_values_and_derivatives() {
        let s = ExpPoly::sin(2.0);
        let c = ExpPoly::cos(2.0);
        for x in [-1.3, 0.0, 0.7] {
            assert!(close(s.eval(x), C64::new((2.0 * x).sin(), 0.0), 1e-15));
            assert!(close(s.derivative().eval(x), c.eval(x) * 2.0, 1e-14));
            assert!(close(s.nth_derivative(2).eval(x), s.eval(x) * -4.0, 1e-14));
        }
        // exact at the origin
        assert_eq!(s.eval(0.0), C64::new(0.0, 0.0));
        assert_eq!(s.derivative().eval(0.0), C64::new(2.0, 0.0));
        assert_eq!(c.eval(0.0), C64::new(1.0, 0.0));
    }

    #[test]
    fn gaussian_derivative() {
        let g = ExpPoly::gaussian(0.5, 0.8);
        for x in [-1.0, 0.2, 2.0] {
            let v = (-(x - 0.5f64).powi(2) / (2.0 * 0.64)).exp();
            assert!(close(g.eval(x), C64::new(v, 0.0), 1e-14));
            let d = -(x - 0.5) / 0.64 * v;
            assert!(close(g.derivative().eval(x), C64::new(d, 0.0), 1e-13));
        }
    }

    #[test]
    fn product_and_shift() {
        let f = ExpPoly::x() * ExpPoly::exp(0.5);
        let g = f.shifted(1.5);
        for x in [-2.0, 0.3, 1.0] {
            assert!(close(g.eval(x), f.eval(x - 1.5), 1e-13));
        }
        let d = f.derivative();
        // (x e^{x/2})' = (1 + x/2) e^{x/2}
        let x = 0.9f64;
        assert!(close(d.eval(x), C64::new((1.0 + x / 2.0) * (x / 2.0).exp(), 0.0), 1e-14));
    }

    #[test]
    fn cancellation_gives_zero() {
        let f = ExpPoly::sin(1.0) - ExpPoly::sin(1.0);
        assert!(f.is_zero());
    }

    #[test]
    fn taylor_data_matches_derivatives() {
        let f = ExpPoly::cos(3.0) * ExpPoly::gaussian(0.0, 1.0);
        let t = f.taylor_data(0.4, 3);
        for (k, v) in t.iter().enumerate() {
            assert!(close(*v, f.nth_derivative(k).eval(0.4), 1e-14));
        }
    }
}
