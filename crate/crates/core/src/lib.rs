//! Sensitivity limits for parameter estimation with multimode Gaussian light.
//!
//! The crate computes the quantum Cramér-Rao bound for a parameter encoded
//! in a pure multimode Gaussian state, constructs the detection-mode basis
//! that carries all first-order signal, optimizes how a bank of squeezers
//! should be routed onto modes, and verifies by seeded Monte Carlo that a
//! balanced homodyne scheme with the local oscillator in the detection mode
//! saturates the bound.
//!
//! Modules:
//! - [`modes`]: grids, mode functions, inner products, detection-basis
//!   construction.
//! - [`gaussian`]: phase-space states, symplectic transforms, squeezer
//!   banks, purity checks.
//! - [`models`]: built-in θ-parametrized state families and numerical
//!   differentiation.
//! - [`fisher`]: Fisher information (full and detection-basis reduced) and
//!   the bounds.
//! - [`oracle`]: an independent Wigner-overlap route to the same
//!   information, used for cross-checks.
//! - [`homodyne`]: Monte Carlo simulation of balanced homodyne detection.
//! - [`allocation`]: squeezing-allocation certificates and random-network
//!   audits.
//! - [`cli`]: the `qcrb` command-line front-end.

#![forbid(unsafe_code)]
// `!(x > 0.0)` is used throughout to reject NaN alongside non-positive values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod allocation;
pub mod cli;
pub mod config;
pub mod error;
pub mod fisher;
pub mod gaussian;
pub mod homodyne;
pub mod models;
pub mod modes;
pub mod oracle;
pub mod pipeline;
pub mod plot;
pub mod report;
pub mod stats;

pub use error::{Error, Result};
