//! Photon-number bookkeeping for bosonic modes.
//!
//! The crate is organised around the life cycle of a few thermal or
//! diagonal mode states:
//!
//! - [`fock`]: truncated Fock-space operators, thermal states and the Bose
//!   entropy scalar.
//! - [`linear`]: Bogoliubov maps acting on first and second moments, and the
//!   non-decrease of the total mean occupation under linear evolution.
//! - [`entropy`]: transfer matrices, double-superstochastic certificates and
//!   the Bose-entropy verdicts built on them.
//! - [`cooling`]: the optimal (permutation) cooling of two thermal modes,
//!   its nearest-neighbour bound and sweeps over the frequency ratio.
//! - [`asymptotic`]: the small frequency-ratio limit of optimal cooling
//!   evaluated by direct summation, Gaussian-integral quadrature and the
//!   Euler-Maclaurin integral.
//! - [`nonlinear`]: three-wave (chi-2) interactions, exact truncated
//!   evolution, second-order formulas and Manley-Rowe invariants.

pub mod asymptotic;
pub mod cooling;
pub mod entropy;
pub mod error;
pub mod fock;
pub mod linear;
pub mod nonlinear;
pub mod quad;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
/// Dense complex matrix.
pub type CMatrix = nalgebra::DMatrix<C64>;
/// Dense complex column vector.
pub type CVector = nalgebra::DVector<C64>;

/// Largest absolute entry of a complex matrix, 0 for empty matrices.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}
