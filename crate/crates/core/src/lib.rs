//! Spectral geometry of the noncommutative 3-torus viewed as a principal
//! U(1) bundle over the noncommutative 2-torus.
//!
//! The crate is organised bottom-up:
//!
//! * [`algebra`]: exact arithmetic on finitely supported elements of
//!   `T³_θ`, the U(1) grading, derivations, trace and the canonical
//!   (Hopf-Galois) map.
//! * [`repr`]: truncated Hilbert space `ℓ²(window) ⊗ ℂ²`, sparse operator
//!   matrices, Pauli structure and the real structure `J`.
//! * [`dirac`]: the Dirac operator, gauge fluctuations, the grading and the
//!   horizontal/vertical decomposition with fibre restrictions.
//! * [`connections`]: one-forms, strong connections, D-connections and the
//!   twisted, lifted and compatible Dirac operators.
//! * [`spectral`]: fibre spectra, lattice zeta functions and residue
//!   (noncommutative integral) estimates.
//! * [`report`]: machine-readable check tables.
//!
//! Truncation is a hard index box. Every operator records a *margin*, the
//! largest index shift it can produce; identities that hold in the full
//! algebra hold exactly on columns whose indices stay at least `margin` away
//! from the window boundary.

pub mod algebra;
pub mod connections;
pub mod dirac;
mod error;
pub mod linalg;
pub mod report;
pub mod repr;
pub mod spectral;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Tolerance for identities that are exact in exact arithmetic.
pub const IDENTITY_TOL: f64 = 1e-12;
/// Tolerance for comparisons between eigenvalue lists.
pub const EIGEN_TOL: f64 = 1e-9;
