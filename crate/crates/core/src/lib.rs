//! Fractional Ostrogradski mechanics.
//!
//! Grünwald-Letnikov discretisations of Riemann-Liouville derivatives, the
//! fractional Taylor basis, a small expression language for Lagrangians on a
//! ladder of fractional orders, symbolic Euler-Lagrange and Hamiltonian
//! derivation, stationary trajectories of quadratic actions and Gaussian
//! Euclidean path integrals.

pub mod basis;
pub mod commands;
pub mod config;
pub mod dsl;
pub mod error;
pub mod fracops;
pub mod lagrangian;
pub mod linalg;
pub mod pathint;
pub mod solver;
pub mod special;
pub mod variational;

pub use error::{Error, Result};
