//! Spectral analysis of selfadjoint matrix pencils and linearized Hamiltonian systems.
//!
//! The crate is `no_std` (it needs `alloc`). Everything here is a pure function of its
//! inputs: eigenvalue branches of `L(λ)` over a real window, the crossings of those
//! branches with zero, graphical and Gram-matrix Krein indices, Evans-Krein function
//! derivatives, and the integer index counts that tie them to the unstable spectrum
//! of `JL`.
#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod branches;
pub mod diff;
pub mod error;
pub mod evans;
pub mod index;
pub mod krein;
pub mod linalg;
pub mod pencil;
pub mod tol;

pub use error::{Error, Result};
pub use linalg::{CMatrix, C64};
pub use tol::Tolerances;
