// SPDX-License-Identifier: Apache-2.0

//! Prefix-expansion Laplace baseline.
//!
//! Candidate sequences are grown breadth-first from the empty prefix. Each
//! candidate (a prefix extended by one activity, or terminated by the end
//! symbol) is queried for its true count, perturbed with `Laplace(1/ε)`
//! noise and rounded. Candidates whose noisy count does not exceed the
//! prune threshold are dropped; surviving terminated candidates form the
//! output. Prefixes are extended only up to the length cutoff.
//!
//! This mechanism generates sequences from the activity alphabet, so it can
//! output variants that never occurred and lose frequent ones. No privacy
//! accounting across the many prefix queries is attempted: it serves as a
//! utility yardstick only.

use alloc::collections::{BTreeMap, VecDeque};
use alloc::vec::Vec;

use rand_core::RngCore;

use crate::rng::unit_f64;
use crate::tsgd::SENSITIVITY;
use crate::{Activity, Error, Result, SimpleEventLog, TraceVariant};

/// Scale `b` of a zero-centered Laplace distribution.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LaplaceScale(f64);

impl LaplaceScale {
    pub fn new(scale: f64) -> Result<Self> {
        if scale.is_finite() && scale > 0.0 {
            Ok(LaplaceScale(scale))
        } else {
            Err(Error::InvalidScale(scale))
        }
    }

    /// `Δf / ε` with unit sensitivity.
    pub fn from_epsilon(epsilon: f64) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::InvalidEpsilon(epsilon));
        }
        Self::new(f64::from(SENSITIVITY) / epsilon)
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Inverse-CDF draw from `Laplace(0, scale)`.
pub fn laplace_sample<R: RngCore + ?Sized>(scale: LaplaceScale, rng: &mut R) -> f64 {
    loop {
        let u = unit_f64(rng) - 0.5;
        let tail = 1.0 - 2.0 * libm::fabs(u);
        if tail > 0.0 {
            return -scale.0 * libm::copysign(1.0, u) * libm::log(tail);
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BaselineConfig {
    epsilon: f64,
    cutoff: usize,
    prune_threshold: f64,
}

impl BaselineConfig {
    /// `prune_threshold` may be `+∞`, which prunes everything.
    pub fn new(epsilon: f64, cutoff: usize, prune_threshold: f64) -> Result<Self> {
        LaplaceScale::from_epsilon(epsilon)?;
        if cutoff == 0 {
            return Err(Error::InvalidCutoff);
        }
        if prune_threshold.is_nan() || prune_threshold < 0.0 {
            return Err(Error::InvalidThreshold(prune_threshold));
        }
        Ok(BaselineConfig {
            epsilon,
            cutoff,
            prune_threshold,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn prune_threshold(&self) -> f64 {
        self.prune_threshold
    }

    fn with_threshold(mut self, threshold: f64) -> Self {
        self.prune_threshold = threshold;
        self
    }
}

/// Smallest length `ℓ` such that at least `coverage` of the distinct variants
/// have length `<= ℓ`.
pub fn cutoff_for_coverage(log: &SimpleEventLog, coverage: f64) -> Result<usize> {
    if !(coverage > 0.0 && coverage <= 1.0) {
        return Err(Error::InvalidCoverage(coverage));
    }
    if log.is_empty() {
        return Err(Error::EmptyLog);
    }
    let mut lengths: Vec<usize> = log.variants().map(TraceVariant::len).collect();
    lengths.sort_unstable();
    let total = lengths.len() as f64;
    for (i, &len) in lengths.iter().enumerate() {
        let next_differs = lengths.get(i + 1).map_or(true, |&n| n != len);
        if next_differs && (i + 1) as f64 / total >= coverage {
            return Ok(len);
        }
    }
    Ok(*lengths.last().expect("non-empty"))
}

/// Decides whether prefix expansion may continue; consulted before every
/// node expansion with the 1-based index of that node.
pub trait ExpansionControl {
    fn proceed(&mut self, expanded: usize) -> bool;
}

/// Never interrupts.
pub struct Unlimited;

impl ExpansionControl for Unlimited {
    fn proceed(&mut self, _: usize) -> bool {
        true
    }
}

/// Stops after a fixed number of expanded nodes.
pub struct NodeLimit(pub usize);

impl ExpansionControl for NodeLimit {
    fn proceed(&mut self, expanded: usize) -> bool {
        expanded <= self.0
    }
}

impl<F: FnMut(usize) -> bool> ExpansionControl for F {
    fn proceed(&mut self, expanded: usize) -> bool {
        self(expanded)
    }
}

/// Expansion was stopped by an [`ExpansionControl`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExpansionAborted {
    /// Index of the node that was refused.
    pub expanded: usize,
}

impl core::fmt::Display for ExpansionAborted {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "prefix expansion stopped at node {}", self.expanded)
    }
}

impl core::error::Error for ExpansionAborted {}

/// A node of the prefix tree kept in the expansion frontier.
struct PrefixNode {
    prefix: Vec<u32>,
    /// Indices of the variants that start with `prefix`.
    members: Vec<u32>,
}

/// Variants as interned token sequences, over a sorted alphabet.
struct Prepared<'a> {
    alphabet: Vec<&'a Activity>,
    variants: Vec<(Vec<u32>, u64)>,
}

impl<'a> Prepared<'a> {
    fn new(log: &'a SimpleEventLog) -> Self {
        let alphabet: Vec<&Activity> = log.activities().into_iter().collect();
        let variants = log
            .iter()
            .map(|(v, f)| {
                let tokens = v
                    .activities()
                    .iter()
                    .map(|a| alphabet.binary_search(&a).expect("from log") as u32)
                    .collect();
                (tokens, f)
            })
            .collect();
        Prepared { alphabet, variants }
    }

    fn variant(&self, tokens: &[u32]) -> TraceVariant {
        TraceVariant::new(
            tokens
                .iter()
                .map(|&t| self.alphabet[t as usize].clone())
                .collect(),
        )
        .expect("terminated prefixes are non-empty")
    }
}

/// Runs the baseline without interruption.
pub fn anonymize<R: RngCore + ?Sized>(
    log: &SimpleEventLog,
    cfg: &BaselineConfig,
    rng: &mut R,
) -> SimpleEventLog {
    match anonymize_with_control(log, cfg, rng, &mut Unlimited) {
        Ok(out) => out,
        Err(_) => unreachable!("unlimited expansion"),
    }
}

/// Runs the baseline, checking `control` before every node expansion.
pub fn anonymize_with_control<R, C>(
    log: &SimpleEventLog,
    cfg: &BaselineConfig,
    rng: &mut R,
    control: &mut C,
) -> core::result::Result<SimpleEventLog, ExpansionAborted>
where
    R: RngCore + ?Sized,
    C: ExpansionControl + ?Sized,
{
    let scale = LaplaceScale::from_epsilon(cfg.epsilon).expect("validated config");
    let prepared = Prepared::new(log);
    let noisy_count =
        |true_count: u64, rng: &mut R| libm::round(true_count as f64 + laplace_sample(scale, rng));

    let mut released = SimpleEventLog::new();
    let mut frontier = VecDeque::new();
    frontier.push_back(PrefixNode {
        prefix: Vec::new(),
        members: (0..prepared.variants.len() as u32).collect(),
    });
    let mut expanded = 0usize;
    while let Some(node) = frontier.pop_front() {
        expanded += 1;
        if !control.proceed(expanded) {
            return Err(ExpansionAborted { expanded });
        }
        let depth = node.prefix.len();

        // End-terminated candidate: the exact variant count of the prefix.
        if depth > 0 {
            let exact: u64 = node
                .members
                .iter()
                .map(|&i| &prepared.variants[i as usize])
                .filter(|(tokens, _)| tokens.len() == depth)
                .map(|(_, f)| f)
                .sum();
            let noisy = noisy_count(exact, rng);
            if noisy > cfg.prune_threshold && noisy >= 1.0 {
                released
                    .add(prepared.variant(&node.prefix), noisy as u64)
                    .expect("noisy count >= 1");
            }
        }

        if depth >= cfg.cutoff {
            continue;
        }
        for symbol in 0..prepared.alphabet.len() as u32 {
            let members: Vec<u32> = node
                .members
                .iter()
                .copied()
                .filter(|&i| prepared.variants[i as usize].0.get(depth) == Some(&symbol))
                .collect();
            let exact: u64 = members
                .iter()
                .map(|&i| prepared.variants[i as usize].1)
                .sum();
            let noisy = noisy_count(exact, rng);
            if noisy > cfg.prune_threshold {
                let mut prefix = node.prefix.clone();
                prefix.push(symbol);
                frontier.push_back(PrefixNode { prefix, members });
            }
        }
    }
    Ok(released)
}

/// Outcome of [`calibrate_prune_threshold`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Calibration {
    pub threshold: f64,
    /// Mean released variant count at `threshold` over every calibration run
    /// made there.
    pub mean_variants: f64,
    /// `false` when the search range did not bracket the target and a
    /// boundary was returned.
    pub bracketed: bool,
    /// Number of threshold evaluations (each of `runs` repetitions).
    pub iterations: u32,
    /// Runs stopped by the expansion control; counted as exceeding the
    /// target.
    pub aborted_runs: u32,
}

const CALIBRATION_ITERATIONS: u32 = 20;
const CALIBRATION_TOLERANCE: f64 = 0.05;

/// Bisects the prune threshold over `[0, max frequency]` so that the mean
/// number of released variants over `runs` repetitions matches
/// `target_variants`.
///
/// Noisy counts are integers, so every threshold in `[n, n + 1)` prunes
/// exactly the same candidates and the mean is a step function. The search
/// therefore bisects over the integer steps. Once two adjacent steps bracket
/// the target, the remaining evaluations are spent alternately on both and
/// pooled, and the step whose pooled mean lies within 5% of the target
/// (closest one on a tie) wins. The returned threshold is the middle of the
/// winning step.
pub fn calibrate_prune_threshold<R: RngCore + ?Sized>(
    log: &SimpleEventLog,
    epsilon: f64,
    cutoff: usize,
    target_variants: usize,
    runs: usize,
    rng: &mut R,
) -> Result<Calibration> {
    calibrate_with_control(
        log,
        epsilon,
        cutoff,
        target_variants,
        runs,
        rng,
        &mut Unlimited,
    )
}

/// Pooled variant counts per integer threshold step.
struct StepMeans {
    totals: BTreeMap<u64, (f64, usize)>,
    aborted_runs: u32,
    evaluations: u32,
}

impl StepMeans {
    fn mean(&self, step: u64) -> f64 {
        let (total, n) = self.totals[&step];
        total / n as f64
    }
}

/// [`calibrate_prune_threshold`] with an expansion control applied to every
/// simulated run.
pub fn calibrate_with_control<R, C>(
    log: &SimpleEventLog,
    epsilon: f64,
    cutoff: usize,
    target_variants: usize,
    runs: usize,
    rng: &mut R,
    control: &mut C,
) -> Result<Calibration>
where
    R: RngCore + ?Sized,
    C: ExpansionControl + ?Sized,
{
    if target_variants == 0 || runs == 0 {
        return Err(Error::InvalidTarget);
    }
    if log.is_empty() {
        return Err(Error::EmptyLog);
    }
    let base = BaselineConfig::new(epsilon, cutoff, 0.0)?;
    let target = target_variants as f64;
    let mut steps = StepMeans {
        totals: BTreeMap::new(),
        aborted_runs: 0,
        evaluations: 0,
    };
    let mut evaluate = |step: u64, steps: &mut StepMeans, rng: &mut R| {
        let cfg = base.with_threshold(step as f64);
        let mut total = 0.0;
        for _ in 0..runs {
            match anonymize_with_control(log, &cfg, rng, control) {
                Ok(out) => total += out.num_variants() as f64,
                Err(_) => {
                    steps.aborted_runs += 1;
                    total = f64::INFINITY;
                }
            }
        }
        let entry = steps.totals.entry(step).or_insert((0.0, 0));
        entry.0 += total;
        entry.1 += runs;
        steps.evaluations += 1;
        steps.mean(step)
    };
    let close = |mean: f64| libm::fabs(mean - target) <= CALIBRATION_TOLERANCE * target;
    let finish = |step: u64, steps: &StepMeans, bracketed: bool| Calibration {
        threshold: if step == 0 { 0.0 } else { step as f64 + 0.5 },
        mean_variants: steps.mean(step),
        bracketed,
        iterations: steps.evaluations,
        aborted_runs: steps.aborted_runs,
    };

    let (mut lo, mut hi) = (0u64, log.max_frequency());
    let mean_lo = evaluate(lo, &mut steps, rng);
    if mean_lo <= target || close(mean_lo) {
        return Ok(finish(lo, &steps, mean_lo >= target || close(mean_lo)));
    }
    let mean_hi = evaluate(hi, &mut steps, rng);
    if mean_hi >= target {
        return Ok(finish(hi, &steps, close(mean_hi)));
    }
    // Invariant: mean(lo) > target >= mean(hi).
    while hi - lo > 1 && steps.evaluations < CALIBRATION_ITERATIONS {
        let mid = lo + (hi - lo) / 2;
        if evaluate(mid, &mut steps, rng) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        return Ok(finish(mid, &steps, true));
    }
    let mut turn = 0;
    while steps.evaluations < CALIBRATION_ITERATIONS {
        evaluate(if turn % 2 == 0 { lo } else { hi }, &mut steps, rng);
        turn += 1;
    }
    let (mean_lo, mean_hi) = (steps.mean(lo), steps.mean(hi));
    let winner = match (close(mean_lo), close(mean_hi)) {
        (true, false) => lo,
        (false, true) => hi,
        _ if libm::fabs(mean_lo - target) <= libm::fabs(mean_hi - target) => lo,
        _ => hi,
    };
    Ok(finish(winner, &steps, true))
}
