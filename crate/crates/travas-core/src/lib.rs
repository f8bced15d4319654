// SPDX-License-Identifier: Apache-2.0

//! Differentially private release of trace variant distributions.
//!
//! The crate is `no_std` (it needs `alloc`) and contains only the algorithmic
//! pieces:
//!
//! * [`log`]: the control-flow abstraction of an event log, a multiset of
//!   trace variants with case frequencies.
//! * [`tsgd`]: the k-truncated symmetric geometric distribution, its
//!   parameter derivation from an `(ε, δ)` budget, exact release
//!   distributions and the exact privacy check built on them.
//! * [`travas`]: partition-selection release of a log (one noise draw per
//!   variant, suppression at or below the truncation bound).
//! * [`baseline`]: the prefix-expansion Laplace mechanism used as a utility
//!   yardstick.
//! * [`edit`], [`flow`], [`metrics`]: Levenshtein distance over activities,
//!   an exact min-cost transportation solver and the two log comparison
//!   metrics built on top of them.
//!
//! Randomness is always supplied by the caller through [`rand_core::RngCore`],
//! so equal seeds give equal outputs.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod baseline;
pub mod edit;
mod error;
pub mod flow;
pub mod log;
pub mod metrics;
mod rng;
pub mod travas;
pub mod tsgd;

pub use error::{Error, Result};
pub use log::{Activity, LogStatistics, SimpleEventLog, TraceVariant};
pub use metrics::LogDistance;
pub use tsgd::{DpParams, TsgdParams};
