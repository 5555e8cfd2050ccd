//! Simulations of a macroscopic body acting as its own decohering environment.
//!
//! The crate is organized by experiment layer:
//!
//! - [`states`]: Gaussian one-body states, product states of `N` clusters and
//!   the log-space overlap algebra behind the `(1 − ε)^N` law.
//! - [`dynamics`]: exact Gaussian and split-step grid propagation of the
//!   collective coordinate, plus the center-of-mass split.
//! - [`liouville`]: the classical phase-space counterpart.
//! - [`double_slit`]: two-branch screen patterns, visibility and the
//!   quantum/classical distance.
//! - [`bath`]: spin-cluster and random-matrix dephasing, recurrences and
//!   sector linking.
//! - [`measurement`]: pointer entanglement, reduced density matrices and
//!   the tunneling doublet.
//! - [`experiment`]: configuration, runs and sweeps that write CSV/JSON
//!   artifacts (used by the `macrodec` binary).
//!
//! Units have `ħ = 1`; cluster masses and frequencies default to `1`.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bath;
pub mod double_slit;
pub mod dynamics;
pub mod error;
pub mod experiment;
pub mod io;
pub mod liouville;
pub mod measurement;
pub mod rng;
pub mod stats;
pub mod states;

pub use error::{Error, Result};
