//! Weyl transform of operator kernels, Wigner functions, the confined
//! eigenfunctions `ψ_E = θ(-x)(e^{i√E x} - e^{-i√E x})` and their closed-form
//! stargenfunctions.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::distributions::PiecewiseSmooth;
use crate::error::{Error, Result};
use crate::expfn::ExpPoly;
use crate::field::{FieldFlags, PhaseSpaceField, Wavefunction};
use crate::grid::{Grid1D, PhaseSpaceGrid};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Edge amplitude above which a state counts as truncated.
pub const EDGE_TOL: f64 = 1e-8;

/// Sampled kernel `K(x_i, y_j) = ⟨x_i|Â|y_j⟩`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorKernel {
    grid: Grid1D,
    values: Vec<C64>,
    hermitian: bool,
}

impl OperatorKernel {
    pub fn new(grid: Grid1D, values: Vec<C64>, hermitian: bool) -> Result<Self> {
        let n = grid.len();
        if values.len() != n * n {
            return Err(Error::Dimension(format!(
                "kernel of {} values on a {n}-point grid",
                values.len()
            )));
        }
        if hermitian {
            for i in 0..n {
                for j in 0..i {
                    let a = values[i * n + j];
                    let b = values[j * n + i].conj();
                    if (a - b).norm() > 1e-12 * a.norm().max(b.norm()).max(1.0) {
                        return Err(Error::Domain(format!(
                            "kernel flagged hermitian is not: K({i},{j}) != conj K({j},{i})"
                        )));
                    }
                }
            }
        }
        Ok(Self {
            grid,
            values,
            hermitian,
        })
    }

    pub fn from_fn(grid: Grid1D, f: impl Fn(f64, f64) -> C64, hermitian: bool) -> Result<Self> {
        let pts = grid.points();
        let values = pts
            .iter()
            .flat_map(|&x| pts.iter().map(move |&y| (x, y)))
            .map(|(x, y)| f(x, y))
            .collect();
        Self::new(grid, values, hermitian)
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn projector(psi: &Wavefunction) -> Self {
        let v = psi.values();
        let values = v.iter().flat_map(|a| v.iter().map(move |b| a * b.conj())).collect();
        Self {
            grid: *psi.grid(),
            values,
            hermitian: true,
        }
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.values[i * self.grid.len() + j]
    }

    /// Bilinear interpolation; zero outside the sampled square.
    pub fn interpolate(&self, x: f64, y: f64) -> C64 {
        let n = self.grid.len();
        let fx = self.grid.fractional_index(x);
        let fy = self.grid.fractional_index(y);
        let top = (n - 1) as f64;
        if fx < 0.0 || fy < 0.0 || fx > top || fy > top {
            return ZERO;
        }
        let i = (fx.floor() as usize).min(n - 2);
        let j = (fy.floor() as usize).min(n - 2);
        let (tx, ty) = (fx - i as f64, fy - j as f64);
        self.get(i, j) * ((1.0 - tx) * (1.0 - ty))
            + self.get(i + 1, j) * (tx * (1.0 - ty))
            + self.get(i, j + 1) * ((1.0 - tx) * ty)
            + self.get(i + 1, j + 1) * (tx * ty)
    }
}

/// FFT of `Σ_j Δy e^{-i p_l y_j} g_j` on the centred lattices
/// `y_j = (j - N/2) Δy`, `p_l = (l - N/2) Δp`.
struct CentredTransform {
    fft: Arc<dyn Fft<f64>>,
    n: usize,
    dy: f64,
}

impl CentredTransform {
    fn new(psgrid: &PhaseSpaceGrid) -> Result<Self> {
        let dy = psgrid.y_spacing().ok_or_else(|| {
            Error::Resolution("momentum grid is not an FFT lattice centred on p = 0".into())
        })?;
        let n = psgrid.p.len();
        Ok(Self {
            fft: FftPlanner::new().plan_fft_forward(n),
            n,
            dy,
        })
    }

    fn y(&self, j: usize) -> f64 {
        (j as f64 - (self.n / 2) as f64) * self.dy
    }

    /// Transforms `g` (indexed like `y_j`) in place into values at `p_l`.
    fn apply(&self, g: &mut [C64]) {
        let half_sign = if (self.n / 2) % 2 == 0 { 1.0 } else { -1.0 };
        for (j, v) in g.iter_mut().enumerate() {
            if j % 2 == 1 {
                *v = -*v;
            }
        }
        self.fft.process(g);
        for (l, v) in g.iter_mut().enumerate() {
            let s = if l % 2 == 1 { -half_sign } else { half_sign };
            *v *= s * self.dy;
        }
    }
}

/// `A(x, p) = ∫ dy e^{-ipy} K(x + y/2, x - y/2)`.
pub fn weyl_transform(k: &OperatorKernel, psgrid: &PhaseSpaceGrid) -> Result<PhaseSpaceField> {
    let tr = CentredTransform::new(psgrid)?;
    let xs = psgrid.x.points();
    let np = tr.n;
    let rows: Vec<Vec<C64>> = xs
        .par_iter()
        .map(|&x| {
            let mut g: Vec<C64> = (0..np)
                .map(|j| {
                    let y = tr.y(j);
                    k.interpolate(x + 0.5 * y, x - 0.5 * y)
                })
                .collect();
            tr.apply(&mut g);
            g
        })
        .collect();
    let mut out = PhaseSpaceField::from_rows(*psgrid, rows)?;
    out.flags.real = k.is_hermitian();
    Ok(out)
}

/// `f_W(x, p) = (1/2π) ∫ dy e^{-ipy} ψ(x + y/2) conj ψ(x - y/2)`.
///
/// Uses the exact evaluator of `ψ` when present, otherwise interpolated
/// samples (zero off the grid). The end of the `y` window is folded with
/// trapezoid weights so the output is real to round-off.
pub fn wigner_function(psi: &Wavefunction, psgrid: &PhaseSpaceGrid) -> Result<PhaseSpaceField> {
    let tr = CentredTransform::new(psgrid)?;
    let xs = psgrid.x.points();
    let np = tr.n;
    let rows: Vec<(Vec<C64>, bool)> = xs
        .par_iter()
        .map(|&x| {
            let mut g: Vec<C64> = (0..np)
                .map(|j| {
                    let y = tr.y(j);
                    psi.value_at(x + 0.5 * y) * psi.value_at(x - 0.5 * y).conj()
                })
                .collect();
            let scale = g.iter().fold(0.0f64, |m, v| m.max(v.norm()));
            let truncated = g[0].norm() > EDGE_TOL * scale.max(1e-300);
            // ±y_max alias onto the same bin: ½(g(-Y) + g(Y)) = Re g(-Y)
            g[0] = C64::new(g[0].re, 0.0);
            tr.apply(&mut g);
            for v in g.iter_mut() {
                *v /= 2.0 * PI;
            }
            (g, truncated)
        })
        .collect();
    let truncated = rows.iter().any(|(_, t)| *t)
        || (!psi.has_analytic() && psi.edge_amplitude() > EDGE_TOL);
    let mut out = PhaseSpaceField::from_rows(*psgrid, rows.into_iter().map(|(r, _)| r).collect())?;
    out.flags = FieldFlags {
        real: true,
        truncation_warning: truncated,
        ..FieldFlags::default()
    };
    Ok(out)
}

/// Discrete Wigner function of one period of a periodic state:
/// `W(x_i, p_m) = Σ_j 2h e^{-2i p_m j h} ψ_{i+j} conj ψ_{i-j}` with
/// `p_m = π m / (N h)`, indices taken mod `N`. Returns `2π f_W`.
pub fn periodic_wigner(values: &[C64], x_min: f64, period: f64) -> Result<PhaseSpaceField> {
    let n = values.len();
    if n < 8 || n % 2 != 0 {
        return Err(Error::Dimension(format!(
            "periodic Wigner needs an even number (>= 8) of samples, got {n}"
        )));
    }
    let h = period / n as f64;
    let x = Grid1D::with_spacing(x_min, h, n)?;
    let dp = PI / period;
    let p = Grid1D::with_spacing(-((n / 2) as f64) * dp, dp, n)?;
    let fft = FftPlanner::new().plan_fft_forward(n);
    let rows: Vec<Vec<C64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut g: Vec<C64> = (0..n)
                .map(|j| values[(i + j) % n] * values[(i + n - j) % n].conj() * (2.0 * h))
                .collect();
            fft.process(&mut g);
            // FFT order m = 0..N-1 → centred m = -N/2..N/2-1
            let mut row = vec![ZERO; n];
            for (l, slot) in row.iter_mut().enumerate() {
                *slot = g[(l + n / 2) % n];
            }
            row
        })
        .collect();
    let mut out = PhaseSpaceField::from_rows(PhaseSpaceGrid::new(x, p), rows)?;
    out.flags.real = true;
    Ok(out)
}

/// `ψ_E(x) = θ(-x)(e^{ikx} - e^{-ikx}) = 2i θ(-x) sin(kx)`, `k = √E`.
pub fn confined_eigenfunction(e: f64, grid: Grid1D) -> Result<Wavefunction> {
    let k = wavenumber(e)?;
    Ok(Wavefunction::from_fn(grid, move |x| {
        if x < 0.0 {
            C64::new(0.0, 2.0 * (k * x).sin())
        } else {
            ZERO
        }
    }))
}

/// `ψ_E` as an exact piecewise-smooth function.
pub fn confined_eigenfunction_symbolic(e: f64) -> Result<PiecewiseSmooth> {
    let k = wavenumber(e)?;
    let phi = ExpPoly::exp(C64::new(0.0, k)) - ExpPoly::exp(C64::new(0.0, -k));
    Ok(PiecewiseSmooth::heaviside_left(0.0, phi, crate::distributions::DEFAULT_N_MAX))
}

fn wavenumber(e: f64) -> Result<f64> {
    if !(e > 0.0 && e.is_finite()) {
        return Err(Error::Domain(format!("energy must be positive (got {e})")));
    }
    Ok(e.sqrt())
}

/// Switch threshold for the removable singularity of `sin(2xu)/u`.
fn switch_threshold(x: f64) -> f64 {
    1e-4 / x.abs().max(1.0)
}

/// `sin(2xu)/u`, continuous through `u = 0`.
pub fn sinc_term(x: f64, u: f64) -> f64 {
    if u.abs() < switch_threshold(x) {
        2.0 * x - 4.0 / 3.0 * x.powi(3) * u * u
    } else {
        (2.0 * x * u).sin() / u
    }
}

/// Weyl transform of `|ψ_E⟩⟨ψ_E|` (no `1/2π`):
///
/// `F_EE = θ(-x)[-2 sin(2x(p+k))/(p+k) - 2 sin(2x(p-k))/(p-k) + (4/p) cos(2kx) sin(2xp)]`.
///
/// The first two terms carry a minus sign; with a plus sign the `p`-marginal
/// would not reproduce `|ψ_E|² = 4 sin²(kx)`.
pub fn stargen_analytic(e: f64, x: f64, p: f64) -> f64 {
    if x >= 0.0 {
        return 0.0;
    }
    let k = e.sqrt();
    -2.0 * sinc_term(x, p + k) - 2.0 * sinc_term(x, p - k)
        + 4.0 * (2.0 * k * x).cos() * sinc_term(x, p)
}

/// The same expression with `+` on the first two terms, kept for comparison.
pub fn stargen_analytic_plus_variant(e: f64, x: f64, p: f64) -> f64 {
    if x >= 0.0 {
        return 0.0;
    }
    let k = e.sqrt();
    2.0 * sinc_term(x, p + k) + 2.0 * sinc_term(x, p - k) + 4.0 * (2.0 * k * x).cos() * sinc_term(x, p)
}

/// [`stargen_analytic`] sampled on a phase-space grid.
pub fn stargen_field(e: f64, psgrid: &PhaseSpaceGrid) -> Result<PhaseSpaceField> {
    wavenumber(e)?;
    let mut f = PhaseSpaceField::from_fn(*psgrid, |x, p| C64::new(stargen_analytic(e, x, p), 0.0));
    f.flags.real = true;
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigenfunction_values() {
        let g = Grid1D::new(-4.0, 4.0, 801).unwrap();
        let psi = confined_eigenfunction(4.0, g).unwrap();
        assert_eq!(psi.value_at(0.0), ZERO);
        assert!(g.points().iter().zip(psi.values()).all(|(x, v)| *x <= 0.0 || *v == ZERO));
        let v = psi.value_at(-PI / 4.0);
        assert!((v - C64::new(0.0, -2.0)).norm() < 1e-15);
        assert!(confined_eigenfunction(0.0, g).is_err());
    }

    #[test]
    fn symbolic_and_sampled_states_agree() {
        let s = confined_eigenfunction_symbolic(2.0).unwrap();
        let g = Grid1D::new(-3.0, 1.0, 101).unwrap();
        let psi = confined_eigenfunction(2.0, g).unwrap();
        for (x, v) in g.points().iter().zip(psi.values()) {
            assert!((s.eval(*x) - v).norm() < 1e-14);
        }
    }

    #[test]
    fn stargen_vanishes_on_the_wall_and_beyond() {
        for p in [-3.0, -1.0, 0.0, 0.5, 1.0, 7.0] {
            assert_eq!(stargen_analytic(1.0, 0.0, p), 0.0);
            assert_eq!(stargen_analytic(1.0, 0.3, p), 0.0);
        }
    }

    #[test]
    fn removable_singularity_is_continuous() {
        let (e, x) = (1.0, -1.0);
        let at = stargen_analytic(e, x, 1.0);
        // Richardson over p = 1 ± 10^-k
        let mut vals = Vec::new();
        for k in 4..=8 {
            let d = 10f64.powi(-k);
            vals.push(0.5 * (stargen_analytic(e, x, 1.0 + d) + stargen_analytic(e, x, 1.0 - d)));
        }
        let last = vals[vals.len() - 1];
        assert!((at - last).abs() < 1e-9 * at.abs().max(1.0), "{at} vs {last}");
        for v in &vals[1..3] {
            assert!((at - v).abs() < 1e-8 * at.abs().max(1.0));
        }
    }

    #[test]
    fn sinc_switch_is_accurate() {
        for x in [-0.1, -1.0, -15.0] {
            let t = switch_threshold(x);
            let u = 0.999 * t;
            let exact = (2.0 * x * u).sin() / u;
            assert!((sinc_term(x, u) - exact).abs() <= 1e-9 * exact.abs());
        }
    }

    #[test]
    fn centred_fft_matches_direct_sum() {
        let x = Grid1D::new(-1.0, 1.0, 8).unwrap();
        let ps = PhaseSpaceGrid::fft_lattice(x, 6.0, 16).unwrap();
        let tr = CentredTransform::new(&ps).unwrap();
        let g: Vec<C64> = (0..16).map(|j| C64::new((j as f64 * 0.7).sin(), j as f64 * 0.1)).collect();
        let mut fast = g.clone();
        tr.apply(&mut fast);
        for (l, p) in ps.p.points().iter().enumerate() {
            let direct: C64 = (0..16)
                .map(|j| g[j] * C64::from_polar(tr.dy, -p * tr.y(j)))
                .sum();
            assert!((direct - fast[l]).norm() < 1e-12, "l={l}");
        }
    }

    #[test]
    fn weyl_transform_requires_fft_lattice() {
        let x = Grid1D::new(-1.0, 1.0, 16).unwrap();
        let p = Grid1D::new(-3.0, 4.0, 16).unwrap();
        let k = OperatorKernel::from_fn(x, |_, _| ZERO, true).unwrap();
        assert!(matches!(
            weyl_transform(&k, &PhaseSpaceGrid::new(x, p)),
            Err(Error::Resolution(_))
        ));
    }

    #[test]
    fn hermitian_flag_is_checked() {
        let x = Grid1D::new(-1.0, 1.0, 8).unwrap();
        assert!(OperatorKernel::from_fn(x, |a, b| C64::new(0.0, a - b), true).is_ok());
        assert!(OperatorKernel::from_fn(x, |a, b| C64::new(a - b, 0.0), true).is_err());
    }
}
