// SPDX-License-Identifier: Apache-2.0

//! The k-truncated symmetric geometric distribution (k-TSGD).
//!
//! For a budget `(ε, δ)` the noise has parameters
//!
//! ```text
//! p = 1 - e^(-ε)
//! k = ⌈ (1/ε) · ln((e^ε + 2δ - 1) / (δ (e^ε + 1))) ⌉,  k >= 1
//! m = p / (1 + (1 - p) - 2 (1 - p)^(k+1))
//! P[X = x] = m (1 - p)^|x|   for x in [-k, k], 0 otherwise
//! ```
//!
//! A count `n` perturbed by `X` and released only when `n + X > k` is
//! `(ε, δ)`-differentially private with respect to adding or removing one
//! case. [`ReleaseDistribution`] enumerates the outcomes of that release
//! exactly and [`hockey_stick`] measures how far a pair of them is from
//! violating the guarantee.

use alloc::vec::Vec;
use core::ops::RangeInclusive;

use rand_core::RngCore;

use crate::rng::unit_f64;
use crate::{Error, Result};

/// Sensitivity of a variant frequency: one case contributes to exactly one
/// variant.
pub const SENSITIVITY: u32 = 1;

/// Values of the ceiling argument closer than this to an integer are snapped
/// to it before taking the ceiling.
pub const INTEGER_GUARD: f64 = 1e-12;

/// A validated privacy budget: `ε > 0` and `0 < δ < 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DpParams {
    epsilon: f64,
    delta: f64,
}

impl DpParams {
    pub fn new(epsilon: f64, delta: f64) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::InvalidEpsilon(epsilon));
        }
        if delta == 0.0 {
            return Err(Error::ZeroDelta);
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidDelta(delta));
        }
        Ok(DpParams { epsilon, delta })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}

/// The unrounded truncation bound `(1/ε) · ln((e^ε + 2δ - 1) / (δ (e^ε + 1)))`.
pub fn truncation_argument(dp: &DpParams) -> f64 {
    let (eps, delta) = (dp.epsilon, dp.delta);
    // e^ε - 1 through expm1 keeps small ε accurate.
    let numerator = libm::expm1(eps) + 2.0 * delta;
    let denominator = delta * (libm::exp(eps) + 1.0);
    libm::log(numerator / denominator) / eps
}

/// Ceiling with the integer guard, clamped to at least one.
fn guarded_ceiling(x: f64) -> u32 {
    let nearest = libm::round(x);
    let snapped = if libm::fabs(x - nearest) < INTEGER_GUARD {
        nearest
    } else {
        x
    };
    let k = libm::ceil(snapped);
    if k < 1.0 {
        1
    } else {
        k as u32
    }
}

/// Derived noise parameters together with the cumulative table used for
/// sampling.
#[derive(Clone, Debug, PartialEq)]
pub struct TsgdParams {
    p: f64,
    k: u32,
    m: f64,
    /// `-ln(1 - p)`; equals ε for parameters derived from a budget.
    decay: f64,
    /// `cdf[i] = P[X <= i - k]` for `i` in `0..=2k`.
    cdf: Vec<f64>,
}

impl TsgdParams {
    /// Derives `(p, k, m)` from a privacy budget.
    pub fn from_dp(dp: &DpParams) -> Self {
        let k = guarded_ceiling(truncation_argument(dp));
        let p = -libm::expm1(-dp.epsilon);
        Self::build(p, k, dp.epsilon)
    }

    /// Direct construction from `p ∈ (0, 1)` and `k >= 1`.
    pub fn from_raw(p: f64, k: u32) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidProbability(p));
        }
        if k == 0 {
            return Err(Error::InvalidTruncation);
        }
        Ok(Self::build(p, k, -libm::log1p(-p)))
    }

    fn build(p: f64, k: u32, decay: f64) -> Self {
        let q = libm::exp(-decay);
        let kf = f64::from(k);
        // 1 + q - 2q^(k+1) = (1 - q^(k+1)) + q (1 - q^k)
        let normalizer = -libm::expm1(-(kf + 1.0) * decay) - q * libm::expm1(-kf * decay);
        let m = p / normalizer;
        let mut params = TsgdParams {
            p,
            k,
            m,
            decay,
            cdf: Vec::new(),
        };
        let mut acc = 0.0;
        params.cdf = params
            .support()
            .map(|x| {
                acc += params.pmf(x);
                acc
            })
            .collect();
        params
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// Probability mass at zero.
    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn support(&self) -> RangeInclusive<i64> {
        let k = i64::from(self.k);
        -k..=k
    }

    pub fn pmf(&self, x: i64) -> f64 {
        let magnitude = x.unsigned_abs();
        if magnitude > u64::from(self.k) {
            return 0.0;
        }
        self.m * libm::exp(-self.decay * magnitude as f64)
    }

    /// `P[X <= x]` read from the cumulative table.
    pub fn cdf(&self, x: i64) -> f64 {
        let k = i64::from(self.k);
        if x < -k {
            0.0
        } else if x >= k {
            1.0
        } else {
            self.cdf[(x + k) as usize]
        }
    }

    /// Inverse-CDF draw over the `2k + 1` support points.
    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> NoiseSample {
        let u = unit_f64(rng);
        let idx = self
            .cdf
            .partition_point(|&c| c <= u)
            .min(self.cdf.len() - 1);
        NoiseSample(idx as i64 - i64::from(self.k))
    }

    /// Exact distribution of the thresholded release of a true count.
    pub fn release_distribution(&self, true_count: u64) -> ReleaseDistribution {
        let mut suppressed = 0.0;
        let mut released = Vec::new();
        for x in self.support() {
            let probability = self.pmf(x);
            let noisy = true_count as i128 + i128::from(x);
            if noisy > i128::from(self.k) {
                released.push((noisy as u64, probability));
            } else {
                suppressed += probability;
            }
        }
        ReleaseDistribution {
            suppressed,
            released,
        }
    }
}

/// One draw from a k-TSGD; always within `[-k, k]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NoiseSample(i64);

impl NoiseSample {
    pub fn value(self) -> i64 {
        self.0
    }
}

/// Outcome of releasing a single variant's count.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum ReleaseOutcome {
    Suppressed,
    Released(u64),
}

/// Exact probabilities over [`ReleaseOutcome`]s for one true count.
#[derive(Clone, Debug, PartialEq)]
pub struct ReleaseDistribution {
    pub suppressed: f64,
    /// Released values in increasing order; every value exceeds `k`.
    pub released: Vec<(u64, f64)>,
}

impl ReleaseDistribution {
    pub fn probability(&self, outcome: ReleaseOutcome) -> f64 {
        match outcome {
            ReleaseOutcome::Suppressed => self.suppressed,
            ReleaseOutcome::Released(v) => self
                .released
                .iter()
                .find(|(value, _)| *value == v)
                .map_or(0.0, |(_, p)| *p),
        }
    }

    pub fn outcomes(&self) -> impl Iterator<Item = (ReleaseOutcome, f64)> + '_ {
        core::iter::once((ReleaseOutcome::Suppressed, self.suppressed)).chain(
            self.released
                .iter()
                .map(|&(v, p)| (ReleaseOutcome::Released(v), p)),
        )
    }

    pub fn total(&self) -> f64 {
        self.outcomes().map(|(_, p)| p).sum()
    }
}

/// `max_S (P[S] - e^ε · Q[S])` over all outcome sets `S`.
///
/// The maximizing set is every outcome whose likelihood ratio `P/Q` exceeds
/// `e^ε`, so the sum runs over those outcomes only.
pub fn hockey_stick(p: &ReleaseDistribution, q: &ReleaseDistribution, epsilon: f64) -> f64 {
    let bound = libm::exp(epsilon);
    p.outcomes()
        .map(|(outcome, mass)| {
            let excess = mass - bound * q.probability(outcome);
            if excess > 0.0 {
                excess
            } else {
                0.0
            }
        })
        .sum()
}

/// Result of checking the `(ε, δ)` inequality for the pair of true counts
/// `(n, n + 1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NeighbourCheck {
    pub count: u64,
    /// Larger of the two directed hockey-stick divergences.
    pub worst: f64,
    /// `δ - worst`; non-negative when the guarantee holds.
    pub slack: f64,
}

impl NeighbourCheck {
    pub fn holds(&self) -> bool {
        self.slack >= 0.0
    }
}

/// Exact `(ε, δ)` check for a single variant whose count is `n` in one log
/// and `n + 1` in the neighbouring log.
pub fn check_neighbours(dp: &DpParams, params: &TsgdParams, n: u64) -> NeighbourCheck {
    let lower = params.release_distribution(n);
    let upper = params.release_distribution(n + 1);
    let worst =
        hockey_stick(&lower, &upper, dp.epsilon).max(hockey_stick(&upper, &lower, dp.epsilon));
    NeighbourCheck {
        count: n,
        worst,
        slack: dp.delta - worst,
    }
}
