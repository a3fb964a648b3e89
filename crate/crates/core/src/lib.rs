//! Exact verification toolkit for randomness extraction from bit-fixing
//! sources.
//!
//! The crate builds deterministic extractors for oblivious bit-fixing
//! sources, verifies resilient-function and exposure-resilient-function
//! properties by exhaustive enumeration in exact dyadic arithmetic, runs the
//! small-support attack against forgetless streaming programs, and
//! reproduces random-function threshold phenomena as seeded, bit-exact
//! experiments.
//!
//! Module map:
//! * [`bits`], [`dyadic`], [`dist`], [`source`], [`table`] — foundational
//!   types: bit strings, exact dyadic rationals, exact distributions,
//!   bit-fixing sources and their enumeration, explicit truth tables.
//! * [`extractors`] — the cycle-walk extractor, parity, the +1/-1 odd-cycle
//!   comparison walk, and the output-length parameter rule.
//! * [`streaming`] — the streaming computation model, forgetlessness,
//!   normalization, builtin programs, and the small-support attack.
//! * [`verify`] — exact worst-case verifiers with witnesses, plus the
//!   decision-tree brute-force oracle for the adaptive verifier.
//! * [`analysis`] — the exact walk distribution on Z_M, the spectral bounds,
//!   the tail-probability pair, and threshold predictions.
//! * [`experiments`] — seeded sweeps over random functions.

pub mod analysis;
pub mod bits;
pub mod dist;
pub mod dyadic;
pub mod error;
pub mod experiments;
pub mod extractors;
pub mod source;
pub mod streaming;
pub mod table;
pub mod verify;

pub use bits::BitString;
pub use dist::Distribution;
pub use dyadic::{Dyadic, Ratio};
pub use error::{Error, Result};
pub use source::{enumerate_sources, ObfsSource};
pub use table::TruthTableFunction;
