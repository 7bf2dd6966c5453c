use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expfn::ExpPoly;

/// Interval `[-RESIDUAL_WINDOW, 0]` on which residuals are sampled.
pub const RESIDUAL_WINDOW: f64 = 10.0;
const RESIDUAL_SAMPLES: usize = 2001;
/// Shooting starts at `x = -SHOOTING_LENGTH`.
pub const SHOOTING_LENGTH: f64 = 10.0;
const SHOOTING_STEPS: usize = 20_000;
/// A boundary value above this forbids a nonzero Dirichlet solution.
pub const BOUNDARY_TOL: f64 = 1e-6;

/// One of the two solutions `ψ_± = exp(λ_± x)`, `λ_± = (k ± ik)/√2`, of
/// `-ψ'' ± ik² ψ = 0` that stays square integrable on the negative half-line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeficiencySolution {
    /// `+1` for `-ψ'' + ik²ψ = 0`, `-1` for `-ψ'' - ik²ψ = 0`.
    pub sign: i8,
    pub lambda: C64,
    /// `max |-ψ'' ± ik²ψ| / max |ψ|` on `[-10, 0]`, from the exact derivative.
    pub residual: f64,
    /// `ψ(0)`.
    pub boundary_value: C64,
    /// `ψ(0)` from RK4 integration of the ODE started at `x = -L` on the
    /// decaying branch.
    pub shooting_value: C64,
    /// `|ψ(-10)|`.
    pub tail: f64,
    /// Dimension of the Dirichlet-compatible solution space.
    pub index: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeficiencyReport {
    pub k: f64,
    pub plus: DeficiencySolution,
    pub minus: DeficiencySolution,
    /// Residual of the trivial solution `C = 0`.
    pub trivial_residual: f64,
    pub indices: (usize, usize),
}

impl DeficiencyReport {
    pub fn self_adjoint(&self) -> bool {
        self.indices == (0, 0)
    }
}

fn rk4_shoot(lambda: C64, lambda_sq: C64, length: f64, steps: usize) -> C64 {
    let h = length / steps as f64;
    let f = |y: [C64; 2]| [y[1], lambda_sq * y[0]];
    let a0 = (-lambda * length).exp();
    let mut y = [a0, lambda * a0];
    for _ in 0..steps {
        let k1 = f(y);
        let k2 = f([y[0] + k1[0] * (h / 2.0), y[1] + k1[1] * (h / 2.0)]);
        let k3 = f([y[0] + k2[0] * (h / 2.0), y[1] + k2[1] * (h / 2.0)]);
        let k4 = f([y[0] + k3[0] * h, y[1] + k3[1] * h]);
        for c in 0..2 {
            y[c] += (k1[c] + k2[c] * 2.0 + k3[c] * 2.0 + k4[c]) * (h / 6.0);
        }
    }
    y[0]
}

fn solution(k: f64, sign: i8) -> DeficiencySolution {
    let s = sign as f64;
    let lambda = C64::new(k, s * k) / 2f64.sqrt();
    let lambda_sq = C64::new(0.0, s * k * k);
    let psi = ExpPoly::exp(lambda);
    let op = psi.nth_derivative(2) * -1.0 + psi.clone() * lambda_sq;
    let (mut worst, mut scale) = (0.0f64, 0.0f64);
    for i in 0..RESIDUAL_SAMPLES {
        let x = -RESIDUAL_WINDOW * i as f64 / (RESIDUAL_SAMPLES - 1) as f64;
        worst = worst.max(op.eval(x).norm());
        scale = scale.max(psi.eval(x).norm());
    }
    let boundary_value = psi.eval(0.0);
    DeficiencySolution {
        sign,
        lambda,
        residual: worst / scale,
        boundary_value,
        shooting_value: rk4_shoot(lambda, lambda_sq, SHOOTING_LENGTH, SHOOTING_STEPS),
        tail: psi.eval(-RESIDUAL_WINDOW).norm(),
        // ψ = C ψ_± with ψ(0) = C ψ_±(0); Dirichlet forces C = 0 unless ψ_±(0) vanishes
        index: usize::from(boundary_value.norm() <= BOUNDARY_TOL),
    }
}

/// Checks that `(Ĥ ± ik²)ψ = 0` has only the trivial solution in the
/// Dirichlet domain, i.e. deficiency indices `(0, 0)`.
pub fn deficiency_check(k: f64) -> Result<DeficiencyReport> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::Domain(format!("k must be positive (got {k})")));
    }
    let plus = solution(k, 1);
    let minus = solution(k, -1);
    Ok(DeficiencyReport {
        k,
        plus,
        minus,
        trivial_residual: 0.0,
        indices: (plus.index, minus.index),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_k_residual_and_boundary() {
        let r = deficiency_check(1.0).unwrap();
        assert!(r.plus.residual < 1e-10 && r.minus.residual < 1e-10);
        assert_eq!(r.plus.boundary_value, C64::new(1.0, 0.0));
        assert!(r.self_adjoint());
    }

    #[test]
    fn shooting_reaches_unit_boundary_value() {
        for k in [0.5, 1.0, 2.0] {
            let r = deficiency_check(k).unwrap();
            for s in [r.plus, r.minus] {
                assert!((s.shooting_value - C64::new(1.0, 0.0)).norm() < 1e-8, "{k} {s:?}");
            }
        }
    }

    #[test]
    fn tail_decay_rate() {
        let r = deficiency_check(2.0).unwrap();
        let expected = (-10.0 * 2f64.sqrt()).exp();
        assert!((r.plus.tail - expected).abs() / expected < 1e-8);
        assert!((r.minus.tail - expected).abs() / expected < 1e-8);
    }

    #[test]
    fn rejects_nonpositive_k() {
        assert!(deficiency_check(0.0).is_err());
        assert!(deficiency_check(-1.0).is_err());
    }
}
