//! Sparsity and statistical-independence analysis of the spike process.
//!
//! The spike process emits one standard basis vector of `R^n` uniformly at
//! random per realization. This crate provides the machinery to compare how
//! different basis families represent it:
//!
//! - [`processes`] — generators and exact probability models (spike process,
//!   2D uniform counterexample, multi-spike variant);
//! - [`bases`] — basis matrices as first-class objects, row classification,
//!   and the closed-form least-dependent basis constructions;
//! - [`dictionary`] — the Haar–Walsh wavelet packet dictionary with periodic
//!   boundary handling and exhaustive tree-basis enumeration;
//! - [`costs`] — sparsity (`l^p`, `l^0`) and coordinate-entropy cost
//!   functions in exact and empirical forms;
//! - [`bestbasis`] — the additive-cost best-basis search with an exhaustive
//!   oracle;
//! - [`analytic`] — scalar closed forms (entropy curves, mutual-information
//!   sequences, cost bounds);
//! - [`verify`] — executable checks that reproduce the theorem-level claims
//!   and numeric values at desk scale.
//!
//! All entropies are in bits (base-2 logarithms, `0 log 0 = 0`). Sampling is
//! seeded and platform-independent; batch evaluations run in parallel by
//! default (`parallel` feature) with bit-identical results in either mode.

pub mod analytic;
pub mod bases;
pub mod bestbasis;
pub mod costs;
pub mod dictionary;
mod error;
pub mod exec;
pub mod processes;
pub mod verify;

pub use error::{Error, Result};

// re-exported so downstream crates share the same matrix types
pub use nalgebra;

/// Formats a float in scientific notation with 12 significant digits, the
/// fixed width used for all diff-able numeric output.
pub fn fmt12(value: f64) -> String {
    format!("{value:.11e}")
}
