//! Special distributions: piecewise-smooth functions with one-sided Taylor data,
//! finite combinations of delta derivatives, their restricted products and the
//! one-sided delta operators `δ̂^{(n)}_±`.

mod combo;
mod piecewise;
mod regularized;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

pub use combo::{DeltaTerm, DistributionCombo};
pub use piecewise::{PiecewiseSmooth, DEFAULT_N_MAX, MATCH_TOL};
pub use regularized::{
    one_sided_from_samples, regularized_delta_sample, richardson, Kernel, OneSidedEstimate,
    RegularizedDelta, DEFAULT_C, MIN_C, POINTS_PER_WIDTH,
};

use crate::error::{Error, Result};
use crate::expfn::ExpPoly;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Plus,
    Minus,
}

/// Anything with a piecewise-smooth regular part. Delta terms never contribute
/// to `δ̂_±` products: once shifted by `ε` their supports are disjoint from `a`.
pub trait RegularPart {
    fn regular_part(&self) -> &PiecewiseSmooth;
}

impl RegularPart for PiecewiseSmooth {
    fn regular_part(&self) -> &PiecewiseSmooth {
        self
    }
}

impl RegularPart for DistributionCombo {
    fn regular_part(&self) -> &PiecewiseSmooth {
        &self.regular
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// `f · δ^{(k)}(x - a) = Σ_j C(k, j) (-1)^j f^{(j)}(a) δ^{(k-j)}(x - a)` given
/// `data = [f(a), f'(a), …, f^{(k)}(a)]`.
pub fn leibniz(k: usize, a: f64, data: &[C64]) -> Vec<DeltaTerm> {
    (0..=k)
        .map(|j| {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            DeltaTerm::new(a, k - j, data[j] * (binomial(k, j) * sign))
        })
        .collect()
}

/// Breakpoints where `f` fails to be `C^n`.
pub fn special_support(f: &PiecewiseSmooth, n: usize) -> Result<Vec<f64>> {
    f.special_support(n)
}

/// `f · G` for a delta term `G` whose location is outside `sp supp^k f`.
pub fn hormander_product(g: &DeltaTerm, f: &PiecewiseSmooth) -> Result<DistributionCombo> {
    let k = g.order;
    let bad = f.special_support(k)?;
    if bad.contains(&g.location) {
        return Err(Error::UndefinedProduct(format!(
            "δ^({k}) at {} meets the special support of order {k}",
            g.location
        )));
    }
    let data = f.one_sided(g.location, Side::Minus, k)?;
    let terms = leibniz(k, g.location, &data)
        .into_iter()
        .map(|t| DeltaTerm::new(t.location, t.order, t.coefficient * g.coefficient))
        .collect();
    Ok(DistributionCombo::singular_only(terms))
}

/// `δ̂^{(n)}_±(x - a)[F]`, computed from the one-sided Taylor data of `F` at `a`.
pub fn delta_hat_apply<F: RegularPart + ?Sized>(
    n: usize,
    a: f64,
    side: Side,
    f: &F,
) -> Result<DistributionCombo> {
    let data = f.regular_part().one_sided(a, side, n)?;
    Ok(DistributionCombo::singular_only(leibniz(n, a, &data)))
}

/// Regularized counterpart of [`delta_hat_apply`] paired with a test function:
/// `∫ δ_η^{(n)}(x - a) F(x ∓ ε) t(x) dx` with the offset taken from `rd`.
pub fn regularized_delta_hat_pairing(
    rd: &RegularizedDelta,
    a: f64,
    side: Side,
    f: &PiecewiseSmooth,
    t: &ExpPoly,
    points: usize,
) -> C64 {
    let eps = match side {
        Side::Plus => -rd.side_offset,
        Side::Minus => rd.side_offset,
    };
    rd.pair_with(a, |x| f.eval(x - eps) * t.eval(x), points)
}

/// Regularized counterpart of [`hormander_product`] paired with a test function.
pub fn regularized_product_pairing(
    rd: &RegularizedDelta,
    g: &DeltaTerm,
    f: &PiecewiseSmooth,
    t: &ExpPoly,
    points: usize,
) -> C64 {
    rd.pair_with(g.location, |x| f.eval(x) * t.eval(x), points) * g.coefficient
}
