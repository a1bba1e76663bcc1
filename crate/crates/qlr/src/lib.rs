//! Certification toolkit for the linear response of driven quantum systems.
//!
//! The library computes exact and first-order responses of finite-dimensional
//! systems under weak driving, decomposes the symmetrized evolution channel
//! through the identity to extract the minimal disturbance probability, and
//! compares the measured response against the bound `4 p_d o_max` that every
//! noncontextual ontological model must obey. Two applications are built on
//! top: work extraction in a two-stroke engine (with weak-value and
//! Kirkwood-Dirac decompositions of the first-order work) and single-qubit
//! phase estimation (Fisher information against its noncontextual ceiling).
//! A finite ontological-model simulator acts as a brute-force oracle for the
//! bound, and a small CLI orchestrates the pipelines from TOML configs.
//!
//! Start with the `examples/` directory; each example exercises one
//! capability end to end.

pub mod certify;
pub mod channels;
pub mod config;
pub mod dynamics;
pub mod engine;
mod error;
pub mod metrology;
pub mod numkit;
pub mod ontomodel;
pub mod report;
pub mod runner;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Default tolerance, relative to operator norm, for Hermiticity/unitarity
/// checks and related predicates.
pub const DEFAULT_TOL: f64 = 1e-10;
