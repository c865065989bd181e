//! Numerics for revealing hidden genuine tripartite nonlocality.
//!
//! The crate builds three families of three-qubit mixed states, runs the
//! entanglement-swapping preparation stage that turns three such states into a
//! fourth by Bell-basis post-selection, evaluates Svetlichny and NS₂ facet
//! inequalities on projective measurements and maximizes them over the twelve
//! measurement angles.
//!
//! Everything here is `no_std` + `alloc`. File formats, parallel sweeps and the
//! command line live in the companion `gtnl` crate.

#![no_std]
#![forbid(unsafe_code)]
// `!(x >= tol)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod bellineq;
pub mod entangle;
mod error;
pub mod measure;
pub mod optimize;
pub mod protocol;
pub mod qlin;
pub mod revelation;
pub mod states;
pub mod tol;

pub use error::{Error, FacetDefect, Result, StateDefect};
pub use num_complex::Complex64;
