use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::piecewise::PiecewiseSmooth;
use crate::expfn::ExpPoly;

/// `coefficient · δ^{(order)}(x - location)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "DeltaRecord", into = "DeltaRecord")]
pub struct DeltaTerm {
    pub location: f64,
    pub order: usize,
    pub coefficient: C64,
}

#[derive(Serialize, Deserialize)]
struct DeltaRecord {
    a: f64,
    k: usize,
    re: f64,
    im: f64,
}

impl From<DeltaRecord> for DeltaTerm {
    fn from(r: DeltaRecord) -> Self {
        Self::new(r.a, r.k, C64::new(r.re, r.im))
    }
}

impl From<DeltaTerm> for DeltaRecord {
    fn from(t: DeltaTerm) -> Self {
        Self {
            a: t.location,
            k: t.order,
            re: t.coefficient.re,
            im: t.coefficient.im,
        }
    }
}

impl DeltaTerm {
    pub fn new(location: f64, order: usize, coefficient: impl Into<C64>) -> Self {
        Self {
            location,
            order,
            coefficient: coefficient.into(),
        }
    }

    /// `⟨δ^{(k)}(x - a), t⟩ = (-1)^k t^{(k)}(a)`.
    pub fn pair(&self, t: &ExpPoly) -> C64 {
        let sign = if self.order % 2 == 0 { 1.0 } else { -1.0 };
        self.coefficient * t.nth_derivative(self.order).eval(self.location) * sign
    }
}

/// Regular part plus a finite sum of delta derivatives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionCombo {
    pub regular: PiecewiseSmooth,
    pub singular: Vec<DeltaTerm>,
}

impl DistributionCombo {
    /// Builds the combination in canonical form.
    pub fn new(regular: PiecewiseSmooth, singular: Vec<DeltaTerm>) -> Self {
        Self { regular, singular }.canonical()
    }

    pub fn zero() -> Self {
        Self::new(PiecewiseSmooth::zero(), Vec::new())
    }

    pub fn regular_only(f: PiecewiseSmooth) -> Self {
        Self::new(f, Vec::new())
    }

    pub fn singular_only(terms: Vec<DeltaTerm>) -> Self {
        Self::new(PiecewiseSmooth::zero(), terms)
    }

    /// `θ^{(m)}(x)`: the step for `m = 0`, `δ^{(m-1)}(x)` otherwise.
    pub fn theta_derivative(m: usize, n_max: usize) -> Self {
        if m == 0 {
            Self::regular_only(PiecewiseSmooth::theta(n_max))
        } else {
            Self::new(
                PiecewiseSmooth::zero().with_n_max(n_max),
                vec![DeltaTerm::new(0.0, m - 1, 1.0)],
            )
        }
    }

    /// Sorts delta terms by `(location, order)`, merges duplicates, drops
    /// zero coefficients and removes breakpoints the regular part does not
    /// need. Idempotent.
    pub fn canonical(mut self) -> Self {
        self.singular.sort_by(|a, b| {
            a.location
                .total_cmp(&b.location)
                .then(a.order.cmp(&b.order))
        });
        let mut merged: Vec<DeltaTerm> = Vec::with_capacity(self.singular.len());
        for t in self.singular {
            match merged.last_mut() {
                Some(last) if last.location == t.location && last.order == t.order => {
                    last.coefficient += t.coefficient;
                }
                _ => merged.push(t),
            }
        }
        merged.retain(|t| t.coefficient != C64::new(0.0, 0.0));
        // -0.0 and 0.0 locations compare equal but print differently
        for t in &mut merged {
            if t.location == 0.0 {
                t.location = 0.0;
            }
        }
        self.singular = merged;
        self.regular = self.regular.simplified();
        self
    }

    pub fn is_canonical(&self) -> bool {
        self.clone().canonical() == *self
    }

    pub fn has_zero_singular_part(&self) -> bool {
        self.singular.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.singular.is_empty() && self.regular.is_zero()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut singular = self.singular.clone();
        singular.extend(&other.singular);
        Self::new(self.regular.add(&other.regular), singular)
    }

    pub fn scale(&self, c: impl Into<C64>) -> Self {
        let c = c.into();
        Self::new(
            self.regular.scale(c),
            self.singular
                .iter()
                .map(|t| DeltaTerm::new(t.location, t.order, t.coefficient * c))
                .collect(),
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    /// Distributional derivative: classical derivative of the pieces, a delta
    /// for every jump, and one more derivative on every delta term.
    pub fn derivative(&self) -> Self {
        let mut singular: Vec<DeltaTerm> = self
            .regular
            .jumps()
            .into_iter()
            .map(|(a, j)| DeltaTerm::new(a, 0, j))
            .collect();
        singular.extend(
            self.singular
                .iter()
                .map(|t| DeltaTerm::new(t.location, t.order + 1, t.coefficient)),
        );
        Self::new(self.regular.classical_derivative(), singular)
    }

    /// `⟨D, t⟩` for the singular part only (exact).
    pub fn pair_singular(&self, t: &ExpPoly) -> C64 {
        self.singular.iter().map(|d| d.pair(t)).sum()
    }

    /// `⟨D, t⟩` with the regular part integrated numerically over `[lo, hi]`.
    pub fn pair(&self, t: &ExpPoly, lo: f64, hi: f64) -> C64 {
        self.pair_singular(t) + self.regular.integrate_against(t, lo, hi, 2000)
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }
}

impl std::fmt::Display for DistributionCombo {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.singular.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.singular.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            let c = t.coefficient;
            let coeff = if c.im == 0.0 {
                format!("{}", c.re)
            } else {
                format!("({}{:+}i)", c.re, c.im)
            };
            let arg = if t.location == 0.0 {
                "x".to_string()
            } else {
                format!("x{:+}", -t.location)
            };
            match t.order {
                0 => write!(f, "{coeff}·δ({arg})")?,
                1 => write!(f, "{coeff}·δ'({arg})")?,
                k => write!(f, "{coeff}·δ^({k})({arg})")?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_merges_and_drops() {
        let d = DistributionCombo::singular_only(vec![
            DeltaTerm::new(0.0, 1, 2.0),
            DeltaTerm::new(0.0, 0, 1.0),
            DeltaTerm::new(0.0, 1, -2.0),
            DeltaTerm::new(-1.0, 0, 3.0),
            DeltaTerm::new(0.0, 0, 0.5),
        ]);
        assert_eq!(
            d.singular,
            vec![DeltaTerm::new(-1.0, 0, 3.0), DeltaTerm::new(0.0, 0, 1.5)]
        );
        assert!(d.is_canonical());
        assert_eq!(d.clone().canonical(), d);
    }

    #[test]
    fn derivative_of_step() {
        let theta = DistributionCombo::theta_derivative(0, 4);
        let d = theta.derivative();
        assert_eq!(d, DistributionCombo::theta_derivative(1, 3));
        assert!(d.regular.is_zero());
        assert_eq!(d.derivative().singular, vec![DeltaTerm::new(0.0, 1, 1.0)]);
    }

    #[test]
    fn pairing_matches_integration_by_parts() {
        // ⟨δ'(x - 1), t⟩ = -t'(1)
        let t = ExpPoly::gaussian(0.0, 1.0);
        let d = DistributionCombo::singular_only(vec![DeltaTerm::new(1.0, 1, 1.0)]);
        let expect = (-0.5f64).exp();
        assert!((d.pair_singular(&t).re - expect).abs() < 1e-15);
    }

    #[test]
    fn json_layout() {
        let d = DistributionCombo::singular_only(vec![DeltaTerm::new(0.0, 1, C64::new(2.0, -1.0))]);
        let v: serde_json::Value = serde_json::from_str(&d.to_json().unwrap()).unwrap();
        assert_eq!(v["singular"][0]["a"], 0.0);
        assert_eq!(v["singular"][0]["k"], 1);
        assert_eq!(v["singular"][0]["re"], 2.0);
        assert_eq!(v["singular"][0]["im"], -1.0);
        let back: DistributionCombo = serde_json::from_value(v).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn display_form() {
        let d = DistributionCombo::singular_only(vec![
            DeltaTerm::new(0.0, 0, 1.0),
            DeltaTerm::new(0.0, 1, 2.0),
        ]);
        assert_eq!(d.to_string(), "1·δ(x) + 2·δ'(x)");
    }
}
