//! Density estimation on the binary hypercube by recursive thresholding of
//! empirical Walsh coefficients.
//!
//! The estimator walks the binary tree of coefficient index prefixes and only
//! descends into a subtree when the estimated energy of all coefficients below
//! it clears a level-dependent threshold, so sparse densities are recovered
//! without touching all `2^d` coefficients.

pub mod baselines;
pub mod bits;
pub mod cli;
pub mod error;
pub mod estimator;
pub mod eval;
pub mod fwht;
pub mod io;
pub mod model;
pub mod rng;

pub use bits::BitVector;
pub use error::{Error, Result};
