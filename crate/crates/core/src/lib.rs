//! Physical Hilbert spaces for quasi-Hermitian Hamiltonians.
//!
//! Given a non-Hermitian `H` and a positive metric `η₊` with `H†η₊ = η₊H`,
//! the crate builds the η-orthonormal eigenbasis of `H`, its projectors and
//! spectral action, the isometry `ρ = √η₊` into the reference space and the
//! equivalent Hermitian Hamiltonian `h = ρHρ⁻¹`. The shifted harmonic
//! oscillator `½(p − iα)² + ½ω²x²` ships as an exactly solvable model.

// Checks are written as `!(x <= tol)` so that NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod construction;
pub mod discretize;
pub mod error;
pub mod evolve;
pub mod io;
pub mod metric;
pub mod models;
pub mod numcore;

pub use error::{Error, Result};
