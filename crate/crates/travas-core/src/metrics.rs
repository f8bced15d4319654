// SPDX-License-Identifier: Apache-2.0

//! Utility metrics between an original and an anonymized log.
//!
//! * Relative log similarity: `1 - EMD` between the two normalized variant
//!   distributions, with normalized Levenshtein distance as ground distance.
//! * Absolute log difference: the minimal number of Levenshtein operations
//!   needed to turn the anonymized case population into the original one.
//!   Surplus cases on either side are matched to the empty trace, which
//!   costs the variant's length.
//!
//! Both run on the same exact integral flow solver. For the similarity the
//! probability masses are put on a common integer grid (the least common
//! multiple of the two case totals when it is small enough, otherwise a
//! `10^6` grid with largest-remainder rounding).

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::edit::{distance, edit_distance};
use crate::flow::{min_cost_flow, FlowNetwork};
use crate::{Error, Result, SimpleEventLog, TraceVariant};

/// Largest exact mass grid before falling back to rounding.
const MAX_EXACT_GRID: u64 = 1 << 31;
const ROUNDED_GRID: u64 = 1_000_000;
/// Normalized ground distances are put on this integer grid for the solver.
/// The reported distance is recomputed from the exact ratios.
const COST_GRID: f64 = (1u64 << 24) as f64;

/// Both utility metrics for one pair of logs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogDistance {
    pub relative_log_similarity: f64,
    pub absolute_log_difference: u64,
}

/// Earth mover's distance with its optimal plan expressed in probability
/// mass.
#[derive(Clone, Debug, PartialEq)]
pub struct EarthMovers {
    pub distance: f64,
    /// `(original variant, anonymized variant, mass)`.
    pub flows: Vec<(TraceVariant, TraceVariant, f64)>,
}

/// Token sequences with activities interned to small integers, shared by
/// both logs so equal labels map to equal tokens.
struct Interned<'a> {
    variants: Vec<(&'a TraceVariant, Vec<u32>, u64)>,
}

fn intern<'a>(log: &'a SimpleEventLog, table: &mut BTreeMap<&'a str, u32>) -> Interned<'a> {
    let variants = log
        .iter()
        .map(|(variant, frequency)| {
            let tokens = variant
                .activities()
                .iter()
                .map(|a| {
                    let next = table.len() as u32;
                    *table.entry(a.as_str()).or_insert(next)
                })
                .collect();
            (variant, tokens, frequency)
        })
        .collect();
    Interned { variants }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Integer masses summing to `grid` proportional to `frequencies`.
fn scale_masses(frequencies: &[u64], total: u64, grid: u64) -> Vec<u64> {
    if grid % total == 0 {
        let factor = grid / total;
        return frequencies.iter().map(|f| f * factor).collect();
    }
    let exact: Vec<u128> = frequencies
        .iter()
        .map(|&f| u128::from(f) * u128::from(grid))
        .collect();
    let mut masses: Vec<u64> = exact
        .iter()
        .map(|&e| (e / u128::from(total)) as u64)
        .collect();
    let assigned: u64 = masses.iter().sum();
    let mut order: Vec<usize> = (0..masses.len()).collect();
    // Largest remainder first; ties by position keep the rounding deterministic.
    order.sort_by(|&a, &b| {
        let ra = exact[a] % u128::from(total);
        let rb = exact[b] % u128::from(total);
        rb.cmp(&ra).then(a.cmp(&b))
    });
    for &i in order.iter().take((grid - assigned) as usize) {
        masses[i] += 1;
    }
    masses
}

/// EMD between the variant distributions of two non-empty logs.
pub fn earth_movers_distance(
    original: &SimpleEventLog,
    anonymized: &SimpleEventLog,
) -> Result<EarthMovers> {
    if original.is_empty() || anonymized.is_empty() {
        return Err(Error::EmptyLog);
    }
    let mut table = BTreeMap::new();
    let left = intern(original, &mut table);
    let right = intern(anonymized, &mut table);

    let (n_left, n_right) = (original.total_cases(), anonymized.total_cases());
    let lcm = (n_left / gcd(n_left, n_right)).checked_mul(n_right);
    let grid = match lcm {
        Some(l) if l <= MAX_EXACT_GRID => l,
        _ => ROUNDED_GRID,
    };
    let frequencies = |side: &Interned<'_>| side.variants.iter().map(|v| v.2).collect::<Vec<_>>();
    let supplies = scale_masses(&frequencies(&left), n_left, grid);
    let demands = scale_masses(&frequencies(&right), n_right, grid);

    let mut ground = Vec::with_capacity(supplies.len() * demands.len());
    for (_, a, _) in &left.variants {
        for (_, b, _) in &right.variants {
            ground.push(edit_distance(a, b).normalized);
        }
    }
    let costs = ground
        .iter()
        .map(|&d| libm::round(d * COST_GRID) as u64)
        .collect();
    let net = FlowNetwork::new(supplies, demands, costs)?;
    let plan = min_cost_flow(&net)?;

    let cols = right.variants.len();
    let scale = grid as f64;
    let mut distance = 0.0;
    let mut flows = Vec::with_capacity(plan.flows.len());
    for &(i, j, amount) in &plan.flows {
        let mass = amount as f64 / scale;
        distance += mass * ground[i * cols + j];
        flows.push((
            left.variants[i].0.clone(),
            right.variants[j].0.clone(),
            mass,
        ));
    }
    Ok(EarthMovers { distance, flows })
}

/// `1 - EMD`, in `[0, 1]`. An empty anonymized log has similarity 0.
pub fn relative_log_similarity(
    original: &SimpleEventLog,
    anonymized: &SimpleEventLog,
) -> Result<f64> {
    if original.is_empty() {
        return Err(Error::EmptyLog);
    }
    if anonymized.is_empty() {
        return Ok(0.0);
    }
    let emd = earth_movers_distance(original, anonymized)?.distance;
    Ok((1.0 - emd).clamp(0.0, 1.0))
}

/// Minimal total Levenshtein cost of matching the anonymized cases to the
/// original ones, unmatched cases priced at their variant length.
pub fn absolute_log_difference(
    original: &SimpleEventLog,
    anonymized: &SimpleEventLog,
) -> Result<u64> {
    let mut table = BTreeMap::new();
    let demand_side = intern(original, &mut table);
    let supply_side = intern(anonymized, &mut table);

    let supplies: Vec<u64> = supply_side.variants.iter().map(|v| v.2).collect();
    let demands: Vec<u64> = demand_side.variants.iter().map(|v| v.2).collect();
    let mut costs = Vec::with_capacity(supplies.len() * demands.len());
    for (_, a, _) in &supply_side.variants {
        for (_, b, _) in &demand_side.variants {
            costs.push(distance(a, b) as u64);
        }
    }
    let to_slack: Vec<u64> = supply_side
        .variants
        .iter()
        .map(|v| v.1.len() as u64)
        .collect();
    let from_slack: Vec<u64> = demand_side
        .variants
        .iter()
        .map(|v| v.1.len() as u64)
        .collect();
    let net = FlowNetwork::with_slack(supplies, demands, costs, &to_slack, &from_slack)?;
    let cost = min_cost_flow(&net)?.total_cost;
    Ok(u64::try_from(cost).expect("bounded by total events"))
}

pub fn compare_logs(original: &SimpleEventLog, anonymized: &SimpleEventLog) -> Result<LogDistance> {
    Ok(LogDistance {
        relative_log_similarity: relative_log_similarity(original, anonymized)?,
        absolute_log_difference: absolute_log_difference(original, anonymized)?,
    })
}
