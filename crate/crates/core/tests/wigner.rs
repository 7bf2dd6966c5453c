use std::f64::consts::PI;

use starconfine::quadrature::{bulk_mask, DEFAULT_MARGIN};
use starconfine::weylwigner::{
    confined_eigenfunction, stargen_analytic, stargen_analytic_plus_variant, stargen_field, wigner_function,
};
use starconfine::{Grid1D, PhaseSpaceGrid};

// ∫ dp F(x, p) against 2π|ψ(x)|² = 8π sin²(kx), integrating over a long
// symmetric p window; the sinc tails fall off like 1/p
fn marginal(f: impl Fn(f64) -> f64) -> f64 {
    let (pmax, n) = (4000.0, 1_600_001);
    let h = 2.0 * pmax / (n - 1) as f64;
    (0..n)
        .map(|i| {
            let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
            w * f(-pmax + i as f64 * h)
        })
        .sum::<f64>()
        * h
}

#[test]
fn p_marginal_reproduces_density() {
    for e in [0.25, 1.0, 4.0] {
        let k = f64::sqrt(e);
        for x in [-0.3, -1.1, -2.5] {
            let got = marginal(|p| stargen_analytic(e, x, p));
            let want = 8.0 * PI * (k * x).sin().powi(2);
            assert!((got - want).abs() < 2e-2, "E={e} x={x}: {got} vs {want}");
        }
    }
}

#[test]
fn plus_sign_variant_fails_marginal() {
    let (e, x) = (1.0, -0.7f64);
    let got = marginal(|p| stargen_analytic_plus_variant(e, x, p));
    let want = 8.0 * PI * x.sin().powi(2);
    assert!((got - want).abs() > 1.0, "{got} vs {want}");
}

#[test]
fn numerical_wigner_matches_closed_form() {
    let x = Grid1D::new(-20.0, 20.0, 1024).unwrap();
    let grid = PhaseSpaceGrid::fft_lattice(x, 80.0, 2048).unwrap();
    let mask = bulk_mask(&grid.x, &[0.0], DEFAULT_MARGIN);
    let np = grid.p.len();
    for e in [0.5, 2.0] {
        let w = wigner_function(&confined_eigenfunction(e, grid.x).unwrap(), &grid).unwrap();
        let f = stargen_field(e, &grid).unwrap();
        let (mut num, mut den) = (0.0, 0.0);
        for (i, xv) in grid.x.points().into_iter().enumerate() {
            if xv >= 0.0 || !mask[i] {
                continue;
            }
            for j in 0..np {
                let a = f.get(i, j);
                num += (w.get(i, j) * (2.0 * PI) - a).norm_sqr();
                den += a.norm_sqr();
            }
        }
        assert!((num / den).sqrt() < 1e-3, "E={e}: {}", (num / den).sqrt());
        assert!(w.max_abs_imag() < 1e-10 * w.max_abs());
    }
}

#[test]
fn closed_form_is_even_in_p() {
    for (x, p) in [(-0.4, 0.3), (-2.0, 5.1), (-7.3, 0.01)] {
        let a = stargen_analytic(1.7, x, p);
        let b = stargen_analytic(1.7, x, -p);
        assert!((a - b).abs() < 1e-12 * a.abs().max(1.0));
    }
}
