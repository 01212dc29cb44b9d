//! Erasure-threshold design for errors-and-erasures decoding over AWGN.
//!
//! A binary block code with minimum Hamming distance `d` is transmitted with
//! BPSK over an AWGN channel and decoded by a bounded-minimum-distance (BMD)
//! decoder that handles `eps` errors and `tau` erasures whenever
//! `2*eps + tau < d`. Received symbols whose reliability falls below a
//! threshold are erased before decoding; with `z` thresholds the decoder runs
//! `z` trials, one per threshold, and fails only if every trial fails.
//!
//! This crate computes
//!
//! * the threshold locations that minimize the decoding error probability at
//!   high SNR, for one threshold ([`single_threshold`]) and for a set of `z`
//!   thresholds ([`multi_threshold`]),
//! * exact and asymptotic block error probabilities for both cases
//!   ([`error_prob`]), including a direct minimizer of the exact probability
//!   that is valid at any SNR,
//! * a reproducible Monte Carlo simulation of the whole chain ([`sim`]) used
//!   to cross-validate the closed-form results.
//!
//! All of it rests on [`gauss`], which provides Gaussian interval
//! probabilities in linear and negative-log form; the latter stay finite and
//! accurate deep in the tails where the linear probabilities underflow.
//!
//! The `gmd` binary exposes the solvers, evaluators and the simulator on the
//! command line and emits CSV tables for plotting.

pub mod error_prob;
pub mod gauss;
pub mod multi_threshold;
pub mod sim;
pub mod single_threshold;

pub use error_prob::IntervalTally;
pub use gauss::{Channel, Interval};
pub use multi_threshold::{IntervalProbs, ThresholdSet};
pub use sim::{QuantizedSymbol, SimEstimate};
pub use single_threshold::CodeShape;

/// Errors shared by the whole crate.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Channel standard deviation must be finite and strictly positive.
    InvalidSigma(f64),
    /// Interval endpoints must satisfy `lo <= hi` and must not be NaN.
    InvalidInterval { lo: f64, hi: f64 },
    /// A single erasure threshold must lie in `[0, 1]`.
    InvalidThreshold(f64),
    /// Threshold sets must be strictly increasing within `[0, 1]`.
    InvalidThresholdSet(String),
    /// Code parameters must satisfy `1 <= d <= n` (and `1 <= k <= n`).
    InvalidCodeShape(String),
    /// Erasure counts handed to a goal function must be non-negative and,
    /// for the single-threshold goal, at most `d`.
    InvalidCount(String),
    /// A count vector does not match the threshold set dimension.
    DimensionMismatch { expected: usize, got: usize },
    /// A root-finding bracket could not be established: the requested
    /// optimality system has no solution with thresholds inside `[0, 1]`
    /// for this channel.
    NoRoot(String),
    /// The closed-form high-SNR threshold is not defined for this channel
    /// (negative discriminant or a value outside `[0, 1]`).
    OutOfRegime(String),
    /// The exact multi-threshold enumeration would visit too many terms;
    /// use the Monte Carlo simulator instead.
    TooLarge { cost: f64, limit: f64 },
}

impl std::fmt::Display for Error {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Error::InvalidSigma(s) => {
                write!(f, "channel standard deviation must be positive, got {s}")
            }
            Error::InvalidInterval { lo, hi } => {
                write!(f, "invalid interval [{lo}, {hi}]")
            }
            Error::InvalidThreshold(t) => {
                write!(f, "threshold must lie in [0, 1], got {t}")
            }
            Error::InvalidThresholdSet(msg) => write!(f, "invalid threshold set: {msg}"),
            Error::InvalidCodeShape(msg) => write!(f, "invalid code parameters: {msg}"),
            Error::InvalidCount(msg) => write!(f, "invalid count: {msg}"),
            Error::DimensionMismatch { expected, got } => {
                write!(f, "expected {expected} gap counts, got {got}")
            }
            Error::NoRoot(msg) => write!(f, "no root: {msg}"),
            Error::OutOfRegime(msg) => write!(f, "out of regime: {msg}"),
            Error::TooLarge { cost, limit } => write!(
                f,
                "exact enumeration needs ~{cost:.3e} terms (limit {limit:.0e}); \
                 use the Monte Carlo simulator for this configuration"
            ),
        }
    }
}

impl std::error::Error for Error {}
