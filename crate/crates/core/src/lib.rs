//! Complex geometric optics solutions of the d-bar Dirac system
//!
//! ```text
//! ∂̄φ₁ = ½ q e^{k̄z̄−kz} φ₂,   ∂φ₂ = ½ σ q̄ e^{kz−k̄z̄} φ₁,   φ₁ → 1, φ₂ → 0,
//! ```
//!
//! for potentials supported in the unit disk, together with the large-|k|
//! asymptotic description of the solution for `q = 1_D` and the tooling
//! that compares the two.
//!
//! * [`grid`]: polar Chebyshev–Fourier grids, transforms, quadrature.
//! * [`dbar`]: solid Cauchy transforms, phase multipliers, residuals.
//! * [`solver`]: fixed-point CGO solver and reflection coefficient.
//! * [`asymptotics`]: zone formulas, profile functions, `R` asymptotics.
//! * [`harness`]: solver-versus-asymptotics comparisons and fits.

pub mod asymptotics;
pub mod dbar;
pub mod error;
pub mod grid;
pub mod harness;
pub mod solver;

pub use error::{Error, Result};
pub use num_complex::Complex64;
