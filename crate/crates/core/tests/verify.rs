use std::f64::consts::PI;

use starconfine::verify::{
    confined_stargen_residual_with, naive_stargen_residual, ResidualReport, StarSide, VerifyConfig,
};
use starconfine::{Grid1D, PhaseSpaceGrid, C64};

fn simpson(n: usize, lo: f64, hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let n = n | 1;
    let h = (hi - lo) / (n - 1) as f64;
    (0..n)
        .map(|i| {
            let w = if i == 0 || i == n - 1 { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
            w * f(lo + i as f64 * h)
        })
        .sum::<f64>()
        * h
        / 3.0
}

// Weak residual ⟨R_η, t ⊗ s⟩ of the left product for ψ = 2iθ(-x) sin(kx) and
// s(p) = exp(-p²/2w²), written in u = x + y/2, v = x - y/2. The free part
// pairs the closed-form p² residual; the boundary part integrates
// δ'_η(u) ψ(u - ε) conj ψ(v - ε) with ŝ(u - v), ψ vanishing above ε.
fn oracle(e: f64, eta: f64, c: f64, center: f64, w: f64) -> f64 {
    let k = e.sqrt();
    let eps = c * eta;
    let t = |x: f64| (-(x - center).powi(2) / (2.0 * w * w)).exp();
    let s_hat = |y: f64| w * (2.0 * PI).sqrt() * (-w * w * y * y / 2.0).exp();
    let free = simpson(40_001, -20.0, 0.0, |x| t(x) * 8.0 * k * (2.0 * k * x).sin() * s_hat(-2.0 * x));
    let d1 = |u: f64| {
        let z = u / eta;
        -z * (-0.5 * z * z).exp() / (eta * eta * (2.0 * PI).sqrt())
    };
    let inner = |u: f64| {
        let su = (k * (u - eps)).sin();
        simpson(8001, -20.0, eps, |v| t(0.5 * (u + v)) * s_hat(u - v) * (k * (v - eps)).sin()) * 4.0 * su
    };
    let boundary = simpson(1601, -12.0 * eta, eps, |u| d1(u) * inner(u));
    free + boundary
}

fn single_test_config(id: &str) -> VerifyConfig {
    let mut cfg = VerifyConfig::default();
    cfg.corpus.retain(|t| t.id == id);
    cfg
}

#[test]
fn confined_weak_residual_matches_oracle() {
    let cfg = single_test_config("gauss_w1");
    let tf = cfg.corpus[0].clone();
    let grid = cfg.confined.grid.build().unwrap();
    let rep = confined_stargen_residual_with(1.0, &grid, &cfg.confined.schedule, &cfg).unwrap();
    // rows within ε of the lower edge have no shifted source
    let eps_max = cfg.confined.c * cfg.confined.schedule[0];
    assert!(rep.invalid_rows <= (eps_max / grid.dx()).round() as usize);
    for eta in &cfg.confined.schedule {
        let got = rep
            .weak
            .iter()
            .find(|r| r.eta == Some(*eta) && r.side == StarSide::Left)
            .unwrap()
            .value;
        let want = oracle(1.0, *eta, cfg.confined.c, tf.center, tf.width);
        assert!((got.re - want).abs() < 1e-3 * want.abs(), "eta={eta}: {got} vs {want}");
        assert!(got.im.abs() < 1e-3 * want.abs(), "eta={eta}: {got}");
    }
    assert!(rep.left_right_discrepancy.unwrap() < 1e-6);
}

#[test]
fn naive_residual_is_large_for_every_energy() {
    let x = Grid1D::new(-12.0, 4.0, 513).unwrap();
    let grid = PhaseSpaceGrid::fft_lattice(x, 40.0, 512).unwrap();
    for e in [0.3, 1.0, 2.5] {
        let rep = naive_stargen_residual(e, &grid).unwrap();
        assert!(rep.bulk.as_ref().unwrap().relative > 0.1, "E={e}");
    }
}

#[test]
fn report_json_round_trip_keeps_values() {
    let x = Grid1D::new(-8.0, 2.0, 257).unwrap();
    let grid = PhaseSpaceGrid::fft_lattice(x, 20.0, 256).unwrap();
    let rep = naive_stargen_residual(1.0, &grid).unwrap();
    let back = ResidualReport::from_json(&rep.to_json().unwrap()).unwrap();
    assert_eq!(rep, back);
    assert!(back.weak.iter().all(|w| w.value != C64::new(0.0, 0.0)));
}
