//! Dirac-Moshinsky oscillator (1+1, 2+1, 3+1), its Jaynes-Cummings blocks, and
//! the two-isospin extension (two two-level atoms in one cavity mode).
//!
//! Everything is built on the conserved excitation number
//! `I = A†A + ½(σ_z + σ_z')`: Hamiltonians are assembled one invariant
//! subspace at a time (at most 4×4), diagonalized with a Jacobi sweep and
//! propagated spectrally. The [`oracle`] module rebuilds the same physics on a
//! truncated full product space and is the ground truth the block pipeline and
//! the closed-form expressions are checked against.
//!
//! Units: ħ = 1, all couplings and detunings share one energy unit.

pub mod blocks;
pub mod dynamics;
pub mod eigen;
pub mod entanglement;
pub mod error;
pub mod oracle;
pub mod qnums;
pub mod validate;

pub use num_complex::Complex64 as C64;

pub use error::{Error, Result};
