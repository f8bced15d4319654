// SPDX-License-Identifier: Apache-2.0

//! Simple event logs: multisets of trace variants.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::{Error, Result};

/// An activity label. Labels are compared exactly (case-sensitive, no
/// normalization).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Activity(String);

impl Activity {
    pub fn new(label: impl Into<String>) -> Result<Self> {
        let label = label.into();
        if label.is_empty() {
            return Err(Error::EmptyActivity);
        }
        if label.chars().any(char::is_control) {
            return Err(Error::InvalidActivity(label));
        }
        Ok(Activity(label))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Activity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// The ordered sequence of activities executed for one case. Never empty.
///
/// Ordering is lexicographic over the activity labels.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TraceVariant(Vec<Activity>);

impl TraceVariant {
    pub fn new(activities: Vec<Activity>) -> Result<Self> {
        if activities.is_empty() {
            return Err(Error::EmptyVariant);
        }
        Ok(TraceVariant(activities))
    }

    /// Builds a variant from raw labels, validating each one.
    pub fn from_labels<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let activities = labels
            .into_iter()
            .map(Activity::new)
            .collect::<Result<Vec<_>>>()?;
        Self::new(activities)
    }

    pub fn activities(&self) -> &[Activity] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    /// Always `false`; present for API symmetry with `len`.
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for TraceVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("<")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            f.write_str(a.as_str())?;
        }
        f.write_str(">")
    }
}

/// A multiset of trace variants. Every stored frequency is at least one.
///
/// Iteration follows the variant ordering, which makes every consumer that
/// walks the log (noise assignment, serialization) deterministic.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SimpleEventLog {
    entries: BTreeMap<TraceVariant, u64>,
}

impl SimpleEventLog {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a log from `(variant, frequency)` pairs; repeated variants have
    /// their frequencies summed.
    pub fn from_entries<I>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (TraceVariant, u64)>,
    {
        let mut log = Self::new();
        for (variant, frequency) in entries {
            log.add(variant, frequency)?;
        }
        Ok(log)
    }

    /// Adds `frequency` cases of `variant` (multiset sum).
    pub fn add(&mut self, variant: TraceVariant, frequency: u64) -> Result<()> {
        if frequency == 0 {
            return Err(Error::ZeroFrequency);
        }
        *self.entries.entry(variant).or_insert(0) += frequency;
        Ok(())
    }

    /// Multiset sum `self ⊎ other`.
    pub fn merged(&self, other: &SimpleEventLog) -> SimpleEventLog {
        let mut out = self.clone();
        for (variant, &frequency) in &other.entries {
            *out.entries.entry(variant.clone()).or_insert(0) += frequency;
        }
        out
    }

    /// Number of cases following `variant`, zero when absent.
    pub fn frequency(&self, variant: &TraceVariant) -> u64 {
        self.entries.get(variant).copied().unwrap_or(0)
    }

    pub fn contains(&self, variant: &TraceVariant) -> bool {
        self.entries.contains_key(variant)
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = (&TraceVariant, u64)> + '_ {
        self.entries.iter().map(|(v, &f)| (v, f))
    }

    pub fn variants(&self) -> impl ExactSizeIterator<Item = &TraceVariant> + '_ {
        self.entries.keys()
    }

    pub fn num_variants(&self) -> usize {
        self.entries.len()
    }

    pub fn total_cases(&self) -> u64 {
        self.entries.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn max_frequency(&self) -> u64 {
        self.entries.values().copied().max().unwrap_or(0)
    }

    pub fn max_variant_length(&self) -> usize {
        self.entries
            .keys()
            .map(TraceVariant::len)
            .max()
            .unwrap_or(0)
    }

    /// Distinct activities over all variants, sorted.
    pub fn activities(&self) -> BTreeSet<&Activity> {
        self.entries
            .keys()
            .flat_map(|v| v.activities().iter())
            .collect()
    }

    /// Entries sorted by descending frequency, then by activity sequence.
    pub fn by_descending_frequency(&self) -> Vec<(&TraceVariant, u64)> {
        let mut out: Vec<_> = self.iter().collect();
        out.sort_by(|(va, fa), (vb, fb)| fb.cmp(fa).then_with(|| va.cmp(vb)));
        out
    }

    pub fn statistics(&self) -> LogStatistics {
        let num_cases = self.total_cases();
        let num_variants = self.num_variants() as u64;
        LogStatistics {
            num_events: self.iter().map(|(v, f)| v.len() as u64 * f).sum(),
            num_cases,
            num_activities: self.activities().len() as u64,
            num_variants,
            trace_uniqueness: if num_cases == 0 {
                0.0
            } else {
                num_variants as f64 / num_cases as f64
            },
        }
    }
}

impl<'a> IntoIterator for &'a SimpleEventLog {
    type Item = (&'a TraceVariant, &'a u64);
    type IntoIter = alloc::collections::btree_map::Iter<'a, TraceVariant, u64>;

    fn into_iter(self) -> Self::IntoIter {
        self.entries.iter()
    }
}

/// Descriptive statistics of a log.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogStatistics {
    pub num_events: u64,
    pub num_cases: u64,
    pub num_activities: u64,
    pub num_variants: u64,
    /// `num_variants / num_cases`, zero for an empty log.
    pub trace_uniqueness: f64,
}
