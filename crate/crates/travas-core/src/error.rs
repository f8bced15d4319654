// SPDX-License-Identifier: Apache-2.0

use alloc::string::String;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Activity labels must be non-empty.
    EmptyActivity,
    /// Activity label contains a control character.
    InvalidActivity(String),
    /// A trace variant needs at least one activity.
    EmptyVariant,
    /// Variant frequencies are case counts and must be at least one.
    ZeroFrequency,
    InvalidEpsilon(f64),
    InvalidDelta(f64),
    /// `δ = 0` requested; partition selection has no pure `ε`-DP variant.
    ZeroDelta,
    InvalidProbability(f64),
    InvalidTruncation,
    InvalidScale(f64),
    InvalidCoverage(f64),
    InvalidCutoff,
    InvalidThreshold(f64),
    InvalidTarget,
    EmptyLog,
    /// Transportation problem with different total supply and demand.
    Unbalanced {
        supply: u64,
        demand: u64,
    },
    /// Cost matrix does not match the number of supply and demand vertices.
    ShapeMismatch {
        expected: usize,
        found: usize,
    },
    /// The flow solver could not route all supply. Balanced networks with
    /// complete bipartite edges never hit this.
    Infeasible,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::EmptyActivity => f.write_str("activity label is empty"),
            Error::InvalidActivity(label) => {
                write!(f, "activity label {label:?} contains a control character")
            }
            Error::EmptyVariant => f.write_str("trace variant has no activities"),
            Error::ZeroFrequency => f.write_str("variant frequency must be positive"),
            Error::InvalidEpsilon(e) => write!(f, "epsilon must be a finite value > 0, got {e}"),
            Error::InvalidDelta(d) => write!(f, "delta must lie in (0, 1), got {d}"),
            Error::ZeroDelta => f.write_str(
                "delta = 0 is not supported: the partition selection mechanism only works for δ > 0",
            ),
            Error::InvalidProbability(p) => write!(f, "probability must lie in (0, 1), got {p}"),
            Error::InvalidTruncation => f.write_str("truncation bound k must be at least 1"),
            Error::InvalidScale(s) => write!(f, "Laplace scale must be a finite value > 0, got {s}"),
            Error::InvalidCoverage(c) => write!(f, "coverage must lie in (0, 1], got {c}"),
            Error::InvalidCutoff => f.write_str("sequence cutoff must be at least 1"),
            Error::InvalidThreshold(t) => write!(f, "prune threshold must be >= 0, got {t}"),
            Error::InvalidTarget => f.write_str("target variant count must be at least 1"),
            Error::EmptyLog => f.write_str("empty log"),
            Error::Unbalanced { supply, demand } => {
                write!(f, "unbalanced network: supply {supply} != demand {demand}")
            }
            Error::ShapeMismatch { expected, found } => {
                write!(f, "cost matrix has {found} entries, expected {expected}")
            }
            Error::Infeasible => f.write_str("flow network is infeasible"),
        }
    }
}

impl core::error::Error for Error {}
