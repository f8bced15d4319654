// SPDX-License-Identifier: Apache-2.0

//! IO, experiment harness and command-line front end around `travas-core`.
//!
//! Event logs can be read from CSV event tables, a plain variant-list format
//! (`act1,act2,...;frequency` per line) or XES, and written as variant lists
//! or XES. The [`harness`] module runs `(ε, δ)` grids with repetitions and
//! reports both utility metrics per cell.

pub mod cli;
pub mod csv_log;
mod error;
pub mod harness;
pub mod input;
pub mod variants;
pub mod xes;

pub use error::LogError;
