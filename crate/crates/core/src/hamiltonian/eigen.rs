use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::profile::{ProfileLu, ProfileRow};
use crate::distributions::{Kernel, RegularizedDelta, MIN_C, POINTS_PER_WIDTH};
use crate::error::{Error, Result};
use crate::field::Wavefunction;
use crate::grid::Grid1D;

/// Settings of the regularized eigensolver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenConfig {
    pub kernel: Kernel,
    /// Shift of the global shift-invert Arnoldi pass.
    pub shift: f64,
    /// Krylov dimension of the global pass; `None` picks `max(40, 4 n_eigs + 30)`.
    pub krylov_dim: Option<usize>,
    /// Gaussian kernels are dropped beyond this many widths.
    pub cutoff_widths: f64,
    /// Accepted residual relative to the row-sum norm of the matrix.
    pub tolerance: f64,
    /// Modes with at least this fraction of their mass at `x > 0` count as exterior.
    pub exterior_mass: f64,
}

impl Default for EigenConfig {
    fn default() -> Self {
        Self {
            kernel: Kernel::Gaussian,
            shift: -1.0,
            krylov_dim: None,
            cutoff_widths: 8.0,
            tolerance: 1e-8,
            exterior_mass: 0.5,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EigenResult {
    pub energy: f64,
    pub imag: f64,
    pub eta: f64,
    pub eps: f64,
    pub l: f64,
    pub n: usize,
    /// `‖(A - E) v‖ / ‖v‖`.
    pub residual: f64,
    pub mass_positive_x: f64,
    /// Unit-norm eigenvector on `[-L, L]`, real-positive at its largest entry.
    pub eigenvector: Wavefunction,
}

/// Serialized form of an [`EigenResult`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenRecord {
    #[serde(rename = "E")]
    pub energy: f64,
    pub eta: f64,
    pub eps: f64,
    #[serde(rename = "L")]
    pub l: f64,
    pub n: usize,
    pub residual: f64,
    pub mass_positive_x: f64,
}

impl EigenResult {
    pub fn record(&self) -> EigenRecord {
        EigenRecord {
            energy: self.energy,
            eta: self.eta,
            eps: self.eps,
            l: self.l,
            n: self.n,
            residual: self.residual,
            mass_positive_x: self.mass_positive_x,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EigenReport {
    /// Lowest modes living at `x < 0`, ascending.
    pub confined: Vec<EigenResult>,
    /// Modes found below the highest confined one that live mostly at `x > 0`.
    pub exterior: Vec<EigenResult>,
}

/// `(mode π / L)²`, the Dirichlet spectrum of the box `[-L, 0]`.
pub fn box_eigenvalue(l: f64, mode: usize) -> f64 {
    (mode as f64 * PI / l).powi(2)
}

/// `|⟨ψ, s⟩| / (‖ψ‖ ‖s‖)` with `s = θ(-x) sin(mode π x / L)`.
pub fn box_overlap(result: &EigenResult, mode: usize) -> f64 {
    let psi = &result.eigenvector;
    let k = mode as f64 * PI / result.l;
    let mut dot = C64::new(0.0, 0.0);
    let (mut nn, mut ss) = (0.0, 0.0);
    for (x, v) in psi.grid().points().iter().zip(psi.values()) {
        let s = if *x < 0.0 { (k * x).sin() } else { 0.0 };
        dot += v.conj() * s;
        nn += v.norm_sqr();
        ss += s * s;
    }
    dot.norm() / (nn * ss).sqrt()
}

/// `-D² + V` on the interior nodes of `[-L, L]`, with
/// `(V ψ)(x_i) = δ'_η(x_i) ψ(x_i - ε)` and `ψ(x_i - ε)` interpolated linearly.
struct Discretization {
    grid: Grid1D,
    m: usize,
    inv12h2: f64,
    /// `(row, column, weight)` entries of `V` in unknown indexing.
    potential: Vec<(usize, usize, f64)>,
}

impl Discretization {
    fn new(l: f64, n: usize, eta: f64, eps: f64, cfg: &EigenConfig) -> Result<Self> {
        let grid = Grid1D::new(-l, l, n)?;
        let h = grid.spacing();
        let rd = RegularizedDelta::new(cfg.kernel, eta, 1)?;
        let reach = match cfg.kernel {
            Kernel::Gaussian => cfg.cutoff_widths * eta,
            Kernel::Bump => eta,
        };
        let m = n - 2;
        let mut potential = Vec::new();
        for u in 0..m {
            let x = grid.point(u + 1);
            if x.abs() >= reach {
                continue;
            }
            let d = rd.eval(x);
            if d == 0.0 {
                continue;
            }
            let f = grid.fractional_index(x - eps);
            let j = f.floor();
            let t = f - j;
            let j = j as isize;
            for (full, w) in [(j, 1.0 - t), (j + 1, t)] {
                // Dirichlet nodes carry ψ = 0
                if full >= 1 && (full as usize) < n - 1 && w != 0.0 {
                    potential.push((u, full as usize - 1, d * w));
                }
            }
        }
        Ok(Self {
            grid,
            m,
            inv12h2: 1.0 / (12.0 * h * h),
            potential,
        })
    }

    fn laplacian_entry(&self, i: usize, j: usize) -> f64 {
        let c = self.inv12h2;
        let d = i as isize - j as isize;
        match d {
            0 if i == 0 || i == self.m - 1 => 29.0 * c,
            0 => 30.0 * c,
            1 | -1 => -16.0 * c,
            2 | -2 => c,
            _ => 0.0,
        }
    }

    fn apply(&self, v: &[f64], out: &mut [f64]) {
        let m = self.m;
        for i in 0..m {
            let lo = i.saturating_sub(2);
            let hi = (i + 2).min(m - 1);
            out[i] = (lo..=hi).map(|j| self.laplacian_entry(i, j) * v[j]).sum();
        }
        for &(i, j, w) in &self.potential {
            out[i] += w * v[j];
        }
    }

    fn norm_estimate(&self) -> f64 {
        let mut rows = vec![64.0 * self.inv12h2; self.m];
        for &(i, _, w) in &self.potential {
            rows[i] += w.abs();
        }
        rows.into_iter().fold(0.0, f64::max)
    }

    fn factor_shifted(&self, sigma: f64) -> Result<ProfileLu> {
        let m = self.m;
        let mut first = (0..m).map(|i| i.saturating_sub(2)).collect::<Vec<_>>();
        for &(i, j, _) in &self.potential {
            first[i] = first[i].min(j);
        }
        let mut rows: Vec<ProfileRow> = (0..m)
            .map(|i| {
                let s = first[i];
                let e = (i + 2).min(m - 1);
                let mut vals = vec![0.0; e + 1 - s];
                for j in i.saturating_sub(2)..=e {
                    vals[j - s] = self.laplacian_entry(i, j);
                }
                vals[i - s] -= sigma;
                (s, vals)
            })
            .collect();
        for &(i, j, w) in &self.potential {
            let s = rows[i].0;
            rows[i].1[j - s] += w;
        }
        ProfileLu::factor(rows)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) -> f64 {
    let n = dot(v, v).sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}

/// Shift-invert Arnoldi with two-pass Gram-Schmidt. Returns the basis and the
/// square Hessenberg block.
fn arnoldi(lu: &ProfileLu, start: &[f64], k: usize) -> (Vec<Vec<f64>>, DMatrix<f64>) {
    let mut basis = vec![start.to_vec()];
    normalize(&mut basis[0]);
    let mut h = DMatrix::<f64>::zeros(k + 1, k);
    let mut steps = k;
    for j in 0..k {
        let mut w = basis[j].clone();
        lu.solve_in_place(&mut w);
        for _ in 0..2 {
            for (i, b) in basis.iter().enumerate() {
                let c = dot(&w, b);
                h[(i, j)] += c;
                w.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
        }
        let beta = normalize(&mut w);
        h[(j + 1, j)] = beta;
        if beta < 1e-14 * h[(j, j)].abs().max(1.0) {
            steps = j + 1;
            break;
        }
        basis.push(w);
    }
    basis.truncate(steps);
    let hk = h.view((0, 0), (steps, steps)).into_owned();
    (basis, hk)
}

/// Eigenvector of a small real matrix for a (possibly complex) eigenvalue.
fn small_eigenvector(h: &DMatrix<f64>, theta: C64) -> DVector<C64> {
    let k = h.nrows();
    let shift = theta * (1.0 + 1e-10) + C64::new(1e-300, 0.0);
    let m = DMatrix::<C64>::from_fn(k, k, |i, j| {
        C64::new(h[(i, j)], 0.0) - if i == j { shift } else { C64::new(0.0, 0.0) }
    });
    let lu = m.lu();
    let mut y = DVector::<C64>::from_element(k, C64::new(1.0, 0.0));
    for _ in 0..3 {
        if let Some(next) = lu.solve(&y) {
            let n = next.norm();
            if n > 0.0 && n.is_finite() {
                y = next / C64::new(n, 0.0);
            }
        }
    }
    y
}

fn ritz_pairs(h: &DMatrix<f64>) -> Vec<C64> {
    let mut thetas: Vec<C64> = h.complex_eigenvalues().iter().copied().collect();
    thetas.sort_by(|a, b| b.norm().total_cmp(&a.norm()));
    thetas
}

fn combine(basis: &[Vec<f64>], y: &DVector<C64>) -> Vec<C64> {
    let m = basis[0].len();
    let mut z = vec![C64::new(0.0, 0.0); m];
    for (b, c) in basis.iter().zip(y.iter()) {
        for (zi, bi) in z.iter_mut().zip(b) {
            *zi += c * bi;
        }
    }
    z
}

fn deterministic_start(m: usize) -> Vec<f64> {
    (0..m)
        .map(|i| 1.0 + 0.5 * (0.37 * i as f64).sin() + 0.25 * (1.91 * i as f64).cos())
        .collect()
}

struct Refined {
    lambda: C64,
    vector: Vec<C64>,
    residual: f64,
}

fn refine(disc: &Discretization, guess: f64, start: &[f64]) -> Result<Refined> {
    let mu = guess + 1e-3 * guess.abs().max(1.0);
    let lu = disc.factor_shifted(mu)?;
    let (basis, h) = arnoldi(&lu, start, 10);
    let theta = ritz_pairs(&h)[0];
    let lambda = C64::new(mu, 0.0) + theta.inv();
    let y = small_eigenvector(&h, theta);
    let mut z = combine(&basis, &y);
    // phase: largest entry real and positive
    let (_, big) = z
        .iter()
        .enumerate()
        .fold((0, C64::new(0.0, 0.0)), |acc, (i, v)| if v.norm() > acc.1.norm() { (i, *v) } else { acc });
    let phase = big.conj() / big.norm();
    z.iter_mut().for_each(|v| *v *= phase);
    let re: Vec<f64> = z.iter().map(|v| v.re).collect();
    let im: Vec<f64> = z.iter().map(|v| v.im).collect();
    let mut are = vec![0.0; re.len()];
    let mut aim = vec![0.0; im.len()];
    disc.apply(&re, &mut are);
    disc.apply(&im, &mut aim);
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..z.len() {
        let av = C64::new(are[i], aim[i]);
        num += (av - lambda * z[i]).norm_sqr();
        den += z[i].norm_sqr();
    }
    Ok(Refined {
        lambda,
        vector: z,
        residual: (num / den).sqrt(),
    })
}

fn validate(l: f64, n: usize, eta: f64, eps: f64, n_eigs: usize) -> Result<()> {
    if !(l > 0.0) {
        return Err(Error::Domain(format!("half-width L must be positive (got {l})")));
    }
    if n < 16 {
        return Err(Error::Dimension(format!("grid size {n} is below 16")));
    }
    if !(eta > 0.0) {
        return Err(Error::Domain(format!("kernel width must be positive (got {eta})")));
    }
    if eps < MIN_C * eta * (1.0 - 1e-12) {
        return Err(Error::RegularizationOrder { eps, eta, c: MIN_C });
    }
    let h = 2.0 * l / (n - 1) as f64;
    if h > eta / POINTS_PER_WIDTH * (1.0 + 1e-9) {
        return Err(Error::Resolution(format!(
            "spacing {h} does not resolve eta = {eta} with {POINTS_PER_WIDTH} points"
        )));
    }
    if n_eigs == 0 {
        return Err(Error::Config("at least one eigenpair must be requested".into()));
    }
    Ok(())
}

/// Lowest `n_eigs` confined eigenpairs of `-D² + δ'_η(x) ψ(x - ε)` on `[-L, L]`
/// with Dirichlet ends, plus the exterior modes found on the way.
pub fn eigensolve_report(
    l: f64,
    n: usize,
    eta: f64,
    eps: f64,
    n_eigs: usize,
    cfg: &EigenConfig,
) -> Result<EigenReport> {
    validate(l, n, eta, eps, n_eigs)?;
    let disc = Discretization::new(l, n, eta, eps, cfg)?;
    let tol = cfg.tolerance * disc.norm_estimate();
    let k = cfg.krylov_dim.unwrap_or((4 * n_eigs + 30).max(40)).min(disc.m);
    let lu = disc.factor_shifted(cfg.shift)?;
    let (basis, h) = arnoldi(&lu, &deterministic_start(disc.m), k);

    let mut candidates: Vec<(C64, C64)> = ritz_pairs(&h)
        .into_iter()
        .take((2 * n_eigs + 8).min(h.nrows()))
        .map(|theta| (C64::new(cfg.shift, 0.0) + theta.inv(), theta))
        .collect();
    candidates.sort_by(|a, b| a.0.re.total_cmp(&b.0.re));

    let grid = disc.grid;
    let h_x = grid.spacing();
    let mut confined: Vec<EigenResult> = Vec::new();
    let mut exterior: Vec<EigenResult> = Vec::new();
    let mut seen: Vec<f64> = Vec::new();
    let mut rejected = Vec::new();
    for (guess, theta) in candidates {
        if confined.len() >= n_eigs {
            break;
        }
        let y = small_eigenvector(&h, theta);
        let start: Vec<f64> = combine(&basis, &y).iter().map(|v| v.re + v.im).collect();
        let r = refine(&disc, guess.re, &start)?;
        let e = r.lambda.re;
        if seen.iter().any(|s| (s - e).abs() <= 1e-6 * e.abs().max(1.0)) {
            continue;
        }
        if r.residual > tol {
            rejected.push((e, r.residual));
            continue;
        }
        seen.push(e);
        let mut values = vec![C64::new(0.0, 0.0); n];
        values[1..n - 1].copy_from_slice(&r.vector);
        let total: f64 = values.iter().map(|v| v.norm_sqr()).sum();
        let positive: f64 = grid
            .points()
            .iter()
            .zip(&values)
            .filter(|(x, _)| **x > 0.0)
            .map(|(_, v)| v.norm_sqr())
            .sum();
        let scale = C64::new(1.0 / (total * h_x).sqrt(), 0.0);
        values.iter_mut().for_each(|v| *v *= scale);
        let result = EigenResult {
            energy: e,
            imag: r.lambda.im,
            eta,
            eps,
            l,
            n,
            residual: r.residual,
            mass_positive_x: positive / total,
            eigenvector: Wavefunction::new(grid, values)?,
        };
        if result.mass_positive_x < cfg.exterior_mass {
            confined.push(result);
        } else {
            exterior.push(result);
        }
    }
    if confined.len() < n_eigs {
        let found: Vec<String> = confined
            .iter()
            .chain(&exterior)
            .map(|r| format!("E={:.6} mass(x>0)={:.3}", r.energy, r.mass_positive_x))
            .collect();
        return Err(Error::Iteration(format!(
            "found {} of {n_eigs} confined modes (eta={eta}, eps={eps}); converged: [{}]; rejected (E, residual): {:?}",
            confined.len(),
            found.join(", "),
            rejected
        )));
    }
    confined.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    exterior.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    Ok(EigenReport { confined, exterior })
}

/// The `n_eigs` lowest confined eigenpairs with default settings.
pub fn eigensolve_regularized(l: f64, n: usize, eta: f64, eps: f64, n_eigs: usize) -> Result<Vec<EigenResult>> {
    Ok(eigensolve_report(l, n, eta, eps, n_eigs, &EigenConfig::default())?.confined)
}
