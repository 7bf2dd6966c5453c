//! Phase-space (Weyl-Wigner) quantum mechanics of a particle confined to the
//! negative half-line with a Dirichlet wall at the origin.
//!
//! Units are fixed throughout: `ħ = 1` and `2m = 1`, so the free Hamiltonian
//! is `p²` and the confining Hamiltonian is `p² + δ̂'₋(x)`.
//!
//! Layout:
//! - [`grid`], [`field`], [`quadrature`], [`diff`]: numeric substrate.
//! - [`expfn`]: exact elementary functions used as smooth pieces and test functions.
//! - [`distributions`]: piecewise-smooth functions, delta combinations and the
//!   one-sided delta operators.
//! - [`weylwigner`]: Weyl transform, Wigner function and the confined
//!   stargenfunctions.
//! - [`star`]: Moyal star product and bracket.
//! - [`hamiltonian`]: the confining Hamiltonian, its symmetry form, deficiency
//!   check and a regularized eigensolver.
//! - [`verify`]: residual reports for the stargenvalue equations.

pub mod diff;
pub mod distributions;
pub mod error;
pub mod expfn;
pub mod field;
pub mod grid;
pub mod hamiltonian;
pub mod quadrature;
pub mod star;
pub mod verify;
pub mod weylwigner;

pub use error::{Error, Result};
pub use expfn::ExpPoly;
pub use field::{PhaseSpaceField, Wavefunction};
pub use grid::{Grid1D, PhaseSpaceGrid};

pub use num_complex::Complex64 as C64;
