//! Ribosome flow through an upstream open reading frame (uORF).
//!
//! The lattice has `n_star = n1 + n2 + n3` sites: scanning particles enter at
//! site 0, a fraction `c` of them is converted into elongating particles at
//! the start codon (site `n1`), elongating particles leave at the stop codon
//! (site `n1 + n2`) and scanning particles exit after site `n_star - 1`.
//! Elongating particles that run into scanning ones knock them off the
//! lattice, which is what makes the exit flow a non-monotone function of the
//! upstream density.
//!
//! Four engines are provided:
//!
//! * [`tasep`]: the stochastic exclusion process (random sequential update),
//! * [`stationary`]: the stationary solution of the mean-field balance
//!   equations, computed by nested bisection,
//! * [`dynamic`]: explicit time relaxation of the same balance equations,
//! * [`analytic`]: the closed-form continuous limit built on the Lambert W
//!   function.
//!
//! The crate is `no_std` and only needs `alloc`.
#![no_std]
// `!(x > 0.0)` style comparisons are deliberate: they reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod analytic;
pub mod dynamic;
mod error;
mod fmath;
pub mod model;
pub mod stationary;
pub mod tasep;

pub use error::{Error, Result};
pub use model::{
    elongating_flow, scanning_flow, validate_geometry, DensityProfile, EngineTag, FlowCurve, ModelParams,
    StationarySolution, UorfGeometry,
};
