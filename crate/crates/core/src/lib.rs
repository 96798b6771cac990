//! Microscopic profiles of infinitely narrow solitons and smooth shock waves.
//!
//! A profile density is expanded in orthonormal Hermite functions and the
//! moment conditions that make the conservation-law residual vanish order by
//! order in the small parameter `ε` become a finite nonlinear algebraic
//! system. This crate assembles the moment tables for that system, solves it
//! (fixed-point iteration for solitons, Newton iteration for shocks), derives
//! the jump constants of the Hopf equation and of two elasticity systems, and
//! verifies solutions by computing the residual as a truncated Laurent series
//! in `ε` whose valuation is the achieved order.
//!
//! The crate is `no_std` and only needs `alloc`. File formats and the command
//! line front end live in the `hermshock` crate.
#![no_std]
#![warn(missing_debug_implementations)]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod error;
pub mod hermite;
pub mod laurent;
pub mod linalg;
pub mod models;
pub mod quadrature;
pub mod residual;
pub mod solvers;

pub use error::{Error, Result};
pub use hermite::{BasisSpec, CoeffVec, MomentTables, Parity};
pub use laurent::{LaurentSeries, Valuation};
pub use linalg::Matrix;
pub use models::{
    Branch, ElasticityParams, ElasticitySystem, SeedPreset, ShockAnsatz, SolitonAnsatz,
};
pub use residual::{DeficitSequence, EquationTag, TestFunction};
pub use solvers::{FixedPointOptions, NewtonOptions, SolveReport, StopCriterion};
