//! Hamiltonian formulation of linear non-Hermitian dynamics.
//!
//! A diagonalizable generator `h` is split into right and left eigenvectors
//! that are biorthonormal. The right state `psi` is paired with a conjugate
//! row `phibar` built from the left eigenvectors; together they form
//! canonical coordinates `q = i hbar psi`, `p = phibar` for the bilinear
//! Hamiltonian `<phibar|h|psi>`. The overlap `<phibar|psi>` replaces the norm
//! as the conserved quantity.

pub mod canonical;
pub mod continuum;
pub mod dynamics;
mod error;
pub mod lorentzian;
pub mod matrix;
pub mod random;
pub mod spectral;

pub use error::{Error, Result};
pub use matrix::NhMatrix;

pub use num_complex::Complex64 as C64;

/// Default reduced Planck constant (natural units).
pub const HBAR: f64 = 1.0;
