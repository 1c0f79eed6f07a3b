//! Prime-grid engine.
//!
//! Every positive integer is a point on the lattice spanned by the primes,
//! with coordinates given by its prime signature. Walking 1, 2, 3, … along
//! that lattice under the Chebyshev (ℓ∞) metric gives the *number trail*;
//! this crate computes its length `L∞(N)`, the gaps between consecutive
//! primes measured along it, and a family of probabilistic models for the
//! norm sequence `‖2‖∞, ‖3‖∞, …` that approximate the trail's growth rate.
//!
//! Module map:
//!
//! * [`signature`]: prime signatures, 64/128-bit factorization and the
//!   segmented norm sieve.
//! * [`trail`]: checkpointed streaming accumulation of `L∞` and the value of
//!   the trail at every prime.
//! * [`gaps`]: classical and trail gap series, histograms, the modified
//!   prime-counting function.
//! * [`analytic`]: ζ(k), letter densities and closed-form constants.
//! * [`words`]: forbidden words of the norm sequence and CRT localisation.
//! * [`shiftmodel`]: exact Markov shifts over shifts of finite type.
//! * [`seqgen`]: stochastic generators that never emit a forbidden word.
//! * [`optimizer`]: differential evolution and the inverse fit of input
//!   distributions.
//! * [`manifest`]: run manifests written by the command-line tool.

// `!(x > 0.0)` is used on purpose so that NaN takes the rejecting branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod error;
pub mod gaps;
pub mod manifest;
pub mod optimizer;
pub mod seqgen;
pub mod shiftmodel;
pub mod signature;
pub mod trail;
pub mod words;

pub use error::{Error, Result};

/// Version of the on-disk formats (checkpoint manifests, stops files, CSV layouts).
pub const FORMAT_VERSION: u32 = 1;
