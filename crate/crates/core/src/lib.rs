//! All-Pairs classical shadow tomography for number-conserving hardcore bosons.
//!
//! The protocol pairs up all `V` sites at random, applies an independent
//! number-conserving two-body gate to every pair and measures occupations.
//! This crate covers the full pipeline:
//!
//! - [`combinatorics`]: binomials, pairing counts, ranked fixed-`N` bases.
//! - [`opstrings`]: operator strings over `{I, Z, a†, a}` and their canonical form.
//! - [`channel`]: the closed-form channel spectrum (`α_d`, `G`, `c_λ`, `β_d`) and a
//!   brute-force superoperator for small volumes.
//! - [`gates`]: the discrete three-gate ensemble, Haar blocks, two-site expectations.
//! - [`simulator`]: ladder Hamiltonian, Lanczos ground states, protocol sampling.
//! - [`estimator`]: per-sample estimators, aggregation and shadow-norm bounds.
//! - [`cli`]: file formats and the command implementations behind the `allpairs` binary.

#![allow(clippy::needless_range_loop)]

pub mod channel;
pub mod cli;
pub mod combinatorics;
pub mod error;
pub mod estimator;
pub mod gates;
pub mod opstrings;
pub mod simulator;
pub mod verify;

pub use error::{Error, Result};

/// Complex amplitude type used throughout.
pub type C64 = num_complex::Complex64;
