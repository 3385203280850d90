//! Exact-arithmetic constructions of pairwise orthogonal families of
//! real sequences, together with machine-checkable certificates.
//!
//! Everything here is computed over arbitrary-precision rationals and
//! quadratic radicals; there is no floating point anywhere.  The crate is
//! `no_std` (with `alloc`) so the constructions can be embedded; file
//! formats and the command line live in the companion `orthofam-cli`
//! crate.
//!
//! The main pieces:
//!
//! * [`exact`] — rationals, values `q·√r` with square-free radicand, and
//!   finite sums of such values with a unique (hence decidable) zero.
//! * [`seq`] — finite prefixes, infinite-sequence handles with support
//!   and convergence metadata, certified inner products and `l_p`
//!   reports.
//! * [`comb`] — the comb family inside every `l_p` for `p > 2`, and its
//!   full-support variant.
//! * [`kunen`] — the perfect orthogonal tree with level-rank
//!   certificates and per-input maximality witnesses.
//! * [`fullsupport`] — finite sign conditions, Hadamard padding, and the
//!   staged build of a full-support family with divergent height series.
//! * [`l2fam`] — staircase/grid families and the unequal-weight tree
//!   whose `l_2` part admits per-input witnesses.
//! * [`diagonal`] — a deterministic finite-stage diagonalizer meeting
//!   requirement and norm goals against registered sequences.

#![cfg_attr(not(test), no_std)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod comb;
pub mod diagonal;
mod error;
pub mod exact;
pub mod fullsupport;
pub mod kunen;
pub mod l2fam;
pub mod linalg;
pub mod seq;

pub use error::{Error, Result};
