//! Quasi-Hermitian metrics from supersymmetric ladder operators on the half line.
//!
//! A seed `u = rho e^{i omega}` with `w = u'/u -> d + ib` (`d < 0`) gives the
//! ladder `L = -D + conj(w)`, the metric `eta = L L^dagger`, the complex
//! Hamiltonian `H = L* L^dagger + alpha` and the real partner `h0`.
//! Modules go from grids and seeds up to dense metric matrices and checks.

pub mod error;
pub mod grid;
pub mod jet;
pub mod metric;
pub mod operators;
pub mod spectral;
pub mod transformation;
pub mod verify;

pub use error::{Error, Result};
