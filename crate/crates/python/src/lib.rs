//! Python bindings: grids, phase-space fields, the closed-form stargenfunction,
//! one-sided delta identities, polynomial star products, the regularized
//! eigensolver and the residual reports.

use std::collections::BTreeMap;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use starconfine::distributions::{delta_hat_apply, Side};
use starconfine::hamiltonian::{self, EigenResult as CoreEigen};
use starconfine::star::{self, Operand, StarConfig};
use starconfine::{verify, weylwigner, C64};

fn py_err(e: starconfine::Error) -> PyErr {
    use starconfine::Error as E;
    match e {
        E::Iteration(_) | E::Io(_) | E::Json(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn to_py_json<'py, T: serde::Serialize>(py: Python<'py>, v: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(v).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

#[pyclass(name = "Grid1D", module = "starconfine_py", frozen, skip_from_py_object)]
#[derive(Clone, Copy)]
struct PyGrid1D(starconfine::Grid1D);

#[pymethods]
impl PyGrid1D {
    #[new]
    fn new(x_min: f64, x_max: f64, n: usize) -> PyResult<Self> {
        starconfine::Grid1D::new(x_min, x_max, n).map(Self).map_err(py_err)
    }

    fn points(&self) -> Vec<f64> {
        self.0.points()
    }

    #[getter]
    fn spacing(&self) -> f64 {
        self.0.spacing()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __repr__(&self) -> String {
        format!("Grid1D({}, {}, {})", self.0.x_min(), self.0.x_max(), self.0.len())
    }
}

#[pyclass(name = "PhaseSpaceGrid", module = "starconfine_py", frozen, skip_from_py_object)]
#[derive(Clone, Copy)]
struct PyPhaseSpaceGrid(starconfine::PhaseSpaceGrid);

#[pymethods]
impl PyPhaseSpaceGrid {
    /// FFT-compatible grid: `x` on `[x_min, x_max]`, `n_p` momenta reciprocal to a `y` window `y_span`.
    #[new]
    fn new(x_min: f64, x_max: f64, n: usize, y_span: f64, n_p: usize) -> PyResult<Self> {
        let x = starconfine::Grid1D::new(x_min, x_max, n).map_err(py_err)?;
        starconfine::PhaseSpaceGrid::fft_lattice(x, y_span, n_p)
            .map(Self)
            .map_err(py_err)
    }

    #[staticmethod]
    fn default() -> Self {
        Self(starconfine::PhaseSpaceGrid::default())
    }

    #[getter]
    fn x(&self) -> PyGrid1D {
        PyGrid1D(self.0.x)
    }

    #[getter]
    fn p(&self) -> PyGrid1D {
        PyGrid1D(self.0.p)
    }

    #[getter]
    fn shape(&self) -> (usize, usize) {
        self.0.shape()
    }
}

#[pyclass(name = "PhaseSpaceField", module = "starconfine_py", frozen)]
struct PyField(starconfine::PhaseSpaceField);

#[pymethods]
impl PyField {
    #[getter]
    fn shape(&self) -> (usize, usize) {
        self.0.grid().shape()
    }

    #[getter]
    fn grid(&self) -> PyPhaseSpaceGrid {
        PyPhaseSpaceGrid(*self.0.grid())
    }

    fn get(&self, i: usize, j: usize) -> PyResult<C64> {
        let (nx, np) = self.0.grid().shape();
        if i >= nx || j >= np {
            return Err(PyValueError::new_err(format!("index ({i}, {j}) outside {nx}x{np}")));
        }
        Ok(self.0.get(i, j))
    }

    /// Row-major values.
    fn values(&self) -> Vec<C64> {
        self.0.values().to_vec()
    }

    fn row(&self, i: usize) -> PyResult<Vec<C64>> {
        if i >= self.0.grid().x.len() {
            return Err(PyValueError::new_err(format!("row {i} out of range")));
        }
        Ok(self.0.row(i).to_vec())
    }

    fn max_abs(&self) -> f64 {
        self.0.max_abs()
    }

    fn max_abs_imag(&self) -> f64 {
        self.0.max_abs_imag()
    }
}

/// `F_EE(x, p)` in closed form (no `1/2π`).
#[pyfunction]
fn stargen_analytic(e: f64, x: f64, p: f64) -> f64 {
    weylwigner::stargen_analytic(e, x, p)
}

#[pyfunction]
fn stargen_field(e: f64, grid: &PyPhaseSpaceGrid) -> PyResult<PyField> {
    weylwigner::stargen_field(e, &grid.0).map(PyField).map_err(py_err)
}

/// Wigner function (with `1/2π`) of `ψ_E = 2iθ(-x) sin(√E x)`.
#[pyfunction]
fn confined_wigner(py: Python<'_>, e: f64, grid: &PyPhaseSpaceGrid) -> PyResult<PyField> {
    let g = grid.0;
    py.detach(move || {
        let psi = weylwigner::confined_eigenfunction(e, g.x)?;
        weylwigner::wigner_function(&psi, &g)
    })
    .map(PyField)
    .map_err(py_err)
}

/// `∫ dp F(0, p)`.
#[pyfunction]
fn wigner_boundary_condition(field: &PyField) -> f64 {
    verify::wigner_boundary_condition(&field.0).value
}

#[pyclass(name = "DistributionCombo", module = "starconfine_py", frozen)]
struct PyCombo(starconfine::distributions::DistributionCombo);

#[pymethods]
impl PyCombo {
    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    /// Delta terms as `(location, order, coefficient)`.
    fn singular(&self) -> Vec<(f64, usize, C64)> {
        self.0.singular.iter().map(|t| (t.location, t.order, t.coefficient)).collect()
    }

    fn to_json(&self) -> PyResult<String> {
        self.0.to_json().map_err(|e| PyRuntimeError::new_err(e.to_string()))
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("DistributionCombo({})", self.0)
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.0 == other.0
    }
}

fn parse_side(side: &str) -> PyResult<Side> {
    match side {
        "+" | "plus" => Ok(Side::Plus),
        "-" | "minus" => Ok(Side::Minus),
        _ => Err(PyValueError::new_err(format!("side must be '+' or '-', got {side:?}"))),
    }
}

/// `δ̂^{(n)}_±(x)[θ^{(m)}(x)]` in canonical form.
#[pyfunction]
fn delta_hat_theta(n: usize, m: usize, side: &str) -> PyResult<PyCombo> {
    let theta = starconfine::distributions::DistributionCombo::theta_derivative(m, 8);
    delta_hat_apply(n, 0.0, parse_side(side)?, &theta)
        .map(PyCombo)
        .map_err(py_err)
}

#[pyclass(name = "PolynomialSymbol", module = "starconfine_py", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PySymbol(star::PolynomialSymbol);

#[pymethods]
impl PySymbol {
    /// Symbol `Σ c_ij x^i p^j` from `{(i, j): c}`.
    #[new]
    fn new(terms: BTreeMap<(usize, usize), C64>) -> Self {
        Self(star::PolynomialSymbol::from_terms(terms))
    }

    #[staticmethod]
    fn x() -> Self {
        Self(star::PolynomialSymbol::x())
    }

    #[staticmethod]
    fn p() -> Self {
        Self(star::PolynomialSymbol::p())
    }

    #[staticmethod]
    fn constant(c: C64) -> Self {
        Self(star::PolynomialSymbol::constant(c))
    }

    fn coefficients(&self) -> BTreeMap<(usize, usize), C64> {
        self.0.coefficients().clone()
    }

    fn eval(&self, x: f64, p: f64) -> C64 {
        self.0.eval(x, p)
    }

    fn star(&self, other: &Self) -> Self {
        Self(self.0.star(&other.0))
    }

    fn moyal_bracket(&self, other: &Self) -> Self {
        Self(self.0.moyal_bracket(&other.0))
    }

    fn poisson_bracket(&self, other: &Self) -> Self {
        Self(self.0.poisson_bracket(&other.0))
    }

    fn __add__(&self, other: &Self) -> Self {
        Self(self.0.add(&other.0))
    }

    fn __sub__(&self, other: &Self) -> Self {
        Self(self.0.sub(&other.0))
    }

    /// Pointwise product with a scalar.
    fn __mul__(&self, c: C64) -> Self {
        Self(self.0.scale(c))
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.0 == other.0
    }

    fn __repr__(&self) -> String {
        let terms: Vec<String> = self
            .0
            .coefficients()
            .iter()
            .map(|((i, j), c)| format!("({i}, {j}): {c}"))
            .collect();
        format!("PolynomialSymbol({{{}}})", terms.join(", "))
    }
}

/// `a ⋆ B` for a polynomial symbol and a sampled field.
#[pyfunction]
#[pyo3(signature = (a, field, order = 6))]
fn star_product(py: Python<'_>, a: &PySymbol, field: &PyField, order: usize) -> PyResult<PyField> {
    let cfg = StarConfig {
        order,
        breakpoints: Vec::new(),
        ..StarConfig::default()
    };
    let op = Operand::Poly(a.0.clone());
    let b = &field.0;
    py.detach(|| star::star_product(&op, b, &cfg))
        .map(PyField)
        .map_err(py_err)
}

#[pyclass(name = "EigenResult", module = "starconfine_py", frozen)]
struct PyEigen(CoreEigen);

#[pymethods]
impl PyEigen {
    #[getter]
    fn energy(&self) -> f64 {
        self.0.energy
    }

    #[getter]
    fn imag(&self) -> f64 {
        self.0.imag
    }

    #[getter]
    fn eta(&self) -> f64 {
        self.0.eta
    }

    #[getter]
    fn eps(&self) -> f64 {
        self.0.eps
    }

    #[getter]
    fn residual(&self) -> f64 {
        self.0.residual
    }

    #[getter]
    fn mass_positive_x(&self) -> f64 {
        self.0.mass_positive_x
    }

    fn eigenvector(&self) -> Vec<C64> {
        self.0.eigenvector.values().to_vec()
    }

    fn box_overlap(&self, mode: usize) -> f64 {
        hamiltonian::box_overlap(&self.0, mode)
    }

    /// Serialized record with keys `E, eta, eps, L, n, residual, mass_positive_x`.
    fn record<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py_json(py, &self.0.record())
    }

    fn __repr__(&self) -> String {
        format!(
            "EigenResult(E={}, eta={}, eps={}, residual={:.2e})",
            self.0.energy, self.0.eta, self.0.eps, self.0.residual
        )
    }
}

/// Lowest confined eigenpairs of `-d²/dx² + δ'_η(x + ε)` on `[-L, L]` with `n` points.
#[pyfunction]
fn eigensolve(py: Python<'_>, l: f64, n: usize, eta: f64, eps: f64, n_eigs: usize) -> PyResult<Vec<PyEigen>> {
    py.detach(|| hamiltonian::eigensolve_regularized(l, n, eta, eps, n_eigs))
        .map(|v| v.into_iter().map(PyEigen).collect())
        .map_err(py_err)
}

#[pyfunction]
fn box_eigenvalue(l: f64, mode: usize) -> f64 {
    hamiltonian::box_eigenvalue(l, mode)
}

#[pyfunction]
fn deficiency_check<'py>(py: Python<'py>, k: f64) -> PyResult<Bound<'py, PyAny>> {
    let r = hamiltonian::deficiency_check(k).map_err(py_err)?;
    to_py_json(py, &r)
}

/// Naive residual report as a dict.
#[pyfunction]
fn naive_residual<'py>(py: Python<'py>, e: f64, grid: &PyPhaseSpaceGrid) -> PyResult<Bound<'py, PyAny>> {
    let g = grid.0;
    let r = py.detach(|| verify::naive_stargen_residual(e, &g)).map_err(py_err)?;
    to_py_json(py, &r)
}

/// Confined residual report on the bundled verification grid.
#[pyfunction]
#[pyo3(signature = (e, schedule = vec![0.2, 0.1, 0.05]))]
fn confined_residual<'py>(py: Python<'py>, e: f64, schedule: Vec<f64>) -> PyResult<Bound<'py, PyAny>> {
    let r = py
        .detach(|| {
            let cfg = verify::VerifyConfig::default();
            let grid = cfg.confined.grid.build()?;
            verify::confined_stargen_residual_with(e, &grid, &schedule, &cfg)
        })
        .map_err(py_err)?;
    to_py_json(py, &r)
}

#[pyfunction]
fn periodic_control(e: f64) -> PyResult<f64> {
    verify::periodic_control(e, &verify::VerifyConfig::default())
        .map(|c| c.residual)
        .map_err(py_err)
}

#[pymodule]
fn starconfine_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyGrid1D>()?;
    m.add_class::<PyPhaseSpaceGrid>()?;
    m.add_class::<PyField>()?;
    m.add_class::<PyCombo>()?;
    m.add_class::<PySymbol>()?;
    m.add_class::<PyEigen>()?;
    m.add_function(wrap_pyfunction!(stargen_analytic, m)?)?;
    m.add_function(wrap_pyfunction!(stargen_field, m)?)?;
    m.add_function(wrap_pyfunction!(confined_wigner, m)?)?;
    m.add_function(wrap_pyfunction!(wigner_boundary_condition, m)?)?;
    m.add_function(wrap_pyfunction!(delta_hat_theta, m)?)?;
    m.add_function(wrap_pyfunction!(star_product, m)?)?;
    m.add_function(wrap_pyfunction!(eigensolve, m)?)?;
    m.add_function(wrap_pyfunction!(box_eigenvalue, m)?)?;
    m.add_function(wrap_pyfunction!(deficiency_check, m)?)?;
    m.add_function(wrap_pyfunction!(naive_residual, m)?)?;
    m.add_function(wrap_pyfunction!(confined_residual, m)?)?;
    m.add_function(wrap_pyfunction!(periodic_control, m)?)?;
    Ok(())
}
