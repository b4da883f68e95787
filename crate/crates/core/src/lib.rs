//! Approximation of multivariate periodic functions from samples taken on
//! unions of rank-1 lattices.
//!
//! The pipeline: [`freqset`] grades frequencies by a product weight and
//! builds the index sets worth keeping; [`lattice`] constructs and verifies
//! sampling lattices on which those frequencies are collision-free;
//! [`spectral`] turns samples into coefficients with one-dimensional FFTs;
//! [`korobov`] prices the result with explicit worst-case error bounds; and
//! [`harness`] wires everything into reproducible convergence experiments.

pub mod error;
pub mod freqset;
pub mod harness;
pub mod korobov;
pub mod lattice;
pub mod spectral;
pub mod zeta;

pub use error::{Error, Result};
