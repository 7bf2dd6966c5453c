//! The confining Hamiltonian `Ĥ = p̂² + δ̂'_-(x)` (units `ħ = 2m = 1`): exact
//! action on `ψ = θ(-x) φ(x)`, the boundary form, the deficiency-index check
//! and a regularized eigensolver.

mod deficiency;
mod eigen;
mod profile;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

pub use deficiency::{deficiency_check, DeficiencyReport, DeficiencySolution};
pub use eigen::{
    box_eigenvalue, box_overlap, eigensolve_regularized, eigensolve_report, EigenConfig, EigenRecord,
    EigenReport, EigenResult,
};
pub use profile::ProfileLu;

use crate::distributions::{delta_hat_apply, DeltaTerm, DistributionCombo, PiecewiseSmooth, Side, DEFAULT_N_MAX};
use crate::error::Result;
use crate::expfn::ExpPoly;
use crate::field::Wavefunction;
use crate::grid::Grid1D;
use crate::quadrature::{weights, QuadratureRule};

/// Tolerance on `|φ(0)|` for membership in the maximal domain.
pub const DOMAIN_TOL: f64 = 1e-12;

/// `ψ = θ(-x) φ(x)` with `φ` exact.
#[derive(Debug, Clone)]
pub struct ConfinedState {
    phi: ExpPoly,
    psi: Wavefunction,
}

impl ConfinedState {
    pub fn new(phi: ExpPoly, grid: Grid1D) -> Self {
        let f = phi.clone();
        let psi = Wavefunction::from_fn(grid, move |x| if x <= 0.0 { f.eval(x) } else { C64::new(0.0, 0.0) });
        Self { phi, psi }
    }

    pub fn phi(&self) -> &ExpPoly {
        &self.phi
    }

    pub fn wavefunction(&self) -> &Wavefunction {
        &self.psi
    }

    pub fn piecewise(&self) -> PiecewiseSmooth {
        PiecewiseSmooth::heaviside_left(0.0, self.phi.clone(), DEFAULT_N_MAX)
    }

    /// `(φ(0), φ'(0))`.
    pub fn boundary_data(&self) -> (C64, C64) {
        let d = self.phi.taylor_data(0.0, 1);
        (d[0], d[1])
    }

    pub fn in_maximal_domain(&self) -> bool {
        self.boundary_data().0.norm() <= DOMAIN_TOL
    }
}

/// `Ĥψ` split into its regular and singular parts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianAction {
    pub total: DistributionCombo,
    /// `-ψ''` in the distributional sense.
    pub kinetic: DistributionCombo,
    /// `δ̂'_-(x)[ψ]`.
    pub boundary: DistributionCombo,
    /// The singular part of `Ĥψ` vanishes, so `Ĥψ` lies in the confined space.
    pub in_range: bool,
}

impl HamiltonianAction {
    pub fn smooth(&self) -> &PiecewiseSmooth {
        &self.total.regular
    }

    pub fn singular(&self) -> &[DeltaTerm] {
        &self.total.singular
    }
}

/// `Ĥ[θ(-x)φ] = -θ(-x)φ'' + 2φ(0) δ'(x)` in canonical form.
pub fn apply_confining_hamiltonian(state: &ConfinedState) -> Result<HamiltonianAction> {
    confining_action(&state.piecewise())
}

/// [`apply_confining_hamiltonian`] for any piecewise-smooth `ψ`.
pub fn confining_action(psi: &PiecewiseSmooth) -> Result<HamiltonianAction> {
    let psi = DistributionCombo::regular_only(psi.clone());
    let kinetic = psi.derivative().derivative().scale(-1.0);
    let boundary = delta_hat_apply(1, 0.0, Side::Minus, &psi)?;
    let total = kinetic.add(&boundary);
    let in_range = total.has_zero_singular_part();
    Ok(HamiltonianAction {
        total,
        kinetic,
        boundary,
        in_range,
    })
}

/// Singular part of `-[θ(-x)φ]''` written as `2δ(x)φ'(x) + δ'(x)φ(x)` with
/// each product expanded by Leibniz.
pub fn boundary_terms_products(phi: &ExpPoly) -> Result<DistributionCombo> {
    use crate::distributions::hormander_product;
    let f = PiecewiseSmooth::smooth(phi.clone(), DEFAULT_N_MAX);
    let fp = PiecewiseSmooth::smooth(phi.derivative(), DEFAULT_N_MAX);
    let a = hormander_product(&DeltaTerm::new(0.0, 0, 2.0), &fp)?;
    let b = hormander_product(&DeltaTerm::new(0.0, 1, 1.0), &f)?;
    Ok(a.add(&b))
}

/// The same boundary terms written with one-sided operators:
/// `2 δ̂_-(x)[ψ'] + δ̂'_-(x)[ψ]` for `ψ = θ(-x)φ`.
pub fn boundary_terms_one_sided(phi: &ExpPoly) -> Result<DistributionCombo> {
    let psi = PiecewiseSmooth::heaviside_left(0.0, phi.clone(), DEFAULT_N_MAX);
    let dpsi = psi.classical_derivative();
    let a = delta_hat_apply(0, 0.0, Side::Minus, &dpsi)?.scale(2.0);
    let b = delta_hat_apply(1, 0.0, Side::Minus, &psi)?;
    Ok(a.add(&b))
}

/// `-ψ'' - Eψ + δ̂'_-(x)[ψ]`; zero singular part when `φ(0) = 0`.
pub fn eigen_equation_residual(phi: &ExpPoly, e: f64) -> Result<DistributionCombo> {
    let psi = PiecewiseSmooth::heaviside_left(0.0, phi.clone(), DEFAULT_N_MAX);
    let action = confining_action(&psi)?;
    let e_psi = DistributionCombo::regular_only(psi).scale(e);
    Ok(action.total.sub(&e_psi))
}

/// Both sides of the boundary identity for `w(ξ, ψ) = (ξ, Ĥψ) - (Ĥξ, ψ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymmetryForm {
    /// `conj(ξ'(0)) ψ(0) - conj(ξ(0)) ψ'(0)`.
    pub boundary: C64,
    /// `∫_{-L}^{0} [conj(ξ)(-ψ'') - conj(-ξ'')ψ] dx` by composite Simpson.
    pub quadrature: C64,
    pub lower_limit: f64,
    pub points: usize,
}

impl SymmetryForm {
    pub fn discrepancy(&self) -> f64 {
        (self.boundary - self.quadrature).norm()
    }
}

/// Default lower integration limit and resolution for [`symmetry_form`].
pub const SYMMETRY_LOWER_LIMIT: f64 = -60.0;
pub const SYMMETRY_POINTS: usize = 120_001;

/// Evaluates the symmetry form of `Ĥ` on the half-line, where it acts as
/// `-d²/dx²`. States are expected to decay towards `x = -L`.
pub fn symmetry_form(xi: &ConfinedState, psi: &ConfinedState) -> SymmetryForm {
    symmetry_form_with(xi, psi, SYMMETRY_LOWER_LIMIT, SYMMETRY_POINTS)
}

pub fn symmetry_form_with(xi: &ConfinedState, psi: &ConfinedState, lower: f64, points: usize) -> SymmetryForm {
    let (x0, x1) = xi.boundary_data();
    let (p0, p1) = psi.boundary_data();
    let boundary = x1.conj() * p0 - x0.conj() * p1;

    let xi2 = xi.phi.nth_derivative(2);
    let psi2 = psi.phi.nth_derivative(2);
    let h = -lower / (points - 1) as f64;
    let w = weights(points, h, QuadratureRule::Simpson);
    let quadrature = w
        .iter()
        .enumerate()
        .map(|(i, wi)| {
            let x = lower + i as f64 * h;
            let a = xi.phi.eval(x).conj() * (-psi2.eval(x));
            let b = (-xi2.eval(x)).conj() * psi.phi.eval(x);
            (a - b) * *wi
        })
        .sum();
    SymmetryForm {
        boundary,
        quadrature,
        lower_limit: lower,
        points,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state(phi: ExpPoly) -> ConfinedState {
        ConfinedState::new(phi, Grid1D::new(-10.0, 2.0, 64).unwrap())
    }

    #[test]
    fn sine_state_maps_into_range() {
        let a = apply_confining_hamiltonian(&state(ExpPoly::sin(1.0))).unwrap();
        assert!(a.in_range);
        for x in [-2.0, -0.5] {
            assert!((a.smooth().eval(x) - C64::new(x.sin(), 0.0)).norm() < 1e-15);
        }
        assert_eq!(a.smooth().eval(0.5), C64::new(0.0, 0.0));
    }

    #[test]
    fn cosine_state_leaves_double_dipole() {
        let a = apply_confining_hamiltonian(&state(ExpPoly::cos(1.0))).unwrap();
        assert!(!a.in_range);
        assert_eq!(a.singular(), &[DeltaTerm::new(0.0, 1, 2.0)]);
    }

    #[test]
    fn linear_state_has_no_singular_part() {
        // -θ(-x)·0 + 2δφ' + 2δ'φ with φ = x: 2δ + 2(0·δ' - δ) = 0
        let a = apply_confining_hamiltonian(&state(ExpPoly::x())).unwrap();
        assert!(a.in_range);
        assert!(a.smooth().is_zero());
    }

    #[test]
    fn both_boundary_forms_agree() {
        for phi in [ExpPoly::cos(1.3), ExpPoly::exp(0.7), ExpPoly::gaussian(0.4, 1.1)] {
            let a = boundary_terms_products(&phi).unwrap();
            let b = boundary_terms_one_sided(&phi).unwrap();
            assert_eq!(a.singular, b.singular);
        }
    }

    #[test]
    fn symmetry_of_non_domain_pair() {
        // ξ = e^x: ξ(0) = ξ'(0) = 1; ψ = (1 - x) e^x: ψ(0) = 1, ψ'(0) = 0
        let xi = state(ExpPoly::exp(1.0));
        let psi = state(ExpPoly::polynomial(&[1.0, -1.0]) * ExpPoly::exp(1.0));
        let w = symmetry_form(&xi, &psi);
        assert!((w.boundary - C64::new(1.0, 0.0)).norm() < 1e-15);
        assert!(w.discrepancy() < 1e-7, "{w:?}");
    }

    #[test]
    fn domain_membership() {
        assert!(state(ExpPoly::sin(2.0)).in_maximal_domain());
        assert!(!state(ExpPoly::cos(2.0)).in_maximal_domain());
    }
}
