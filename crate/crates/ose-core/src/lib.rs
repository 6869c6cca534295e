//! Sparse oblivious subspace embeddings at desk scale: the classical sketch
//! constructions (Count-Sketch, OSNAP, Gaussian, block-Hadamard), the
//! block-structured hard-instance distributions that defeat them, an exact
//! eigenvalue-based distortion checker, and the adversarial collision-finding
//! procedures that certify failures.
//!
//! The crate is organized around the experiment pipeline:
//! [`constructions`] draws a sketch Π, [`hardinstances`] draws a random
//! isometry U, [`embedcheck`] decides exactly whether Π preserves col(U) to
//! within 1±ε, [`adversary`] hunts for colliding heavy column pairs and
//! builds anti-concentration witnesses, and [`experiments`] wraps it all in
//! reproducible Monte Carlo sweeps.

// index-based loops over rows/columns read better in matrix code
#![allow(clippy::needless_range_loop)]

pub mod adversary;
pub mod constructions;
pub mod embedcheck;
pub mod error;
pub mod experiments;
pub mod formats;
pub mod hardinstances;
pub mod rng;
pub mod sparsemat;

pub use error::{Error, Result};
