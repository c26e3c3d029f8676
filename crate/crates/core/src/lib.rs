//! Digitized counterdiabatic driving of the periodic transverse-field Ising
//! chain.
//!
//! Two engines share one model layer: [`dense`] works on the full 2^L
//! Hilbert space and serves as ground truth for small chains, while
//! [`fermion`] decouples the chain into independent 2×2 momentum blocks and
//! scales to hundreds of sites. [`cd_solver`] supplies the ansatz weights,
//! [`bound`] evaluates the state-dependent Trotter error bound, and
//! [`harness`] runs sweeps, fits slopes and draws figures.

pub mod bound;
pub mod cd_solver;
pub mod dense;
pub mod error;
pub mod fermion;
pub mod harness;
mod integrate;
pub mod model;

pub use error::{Error, Result};
pub use integrate::Convergence;
