// SPDX-License-Identifier: Apache-2.0

//! Levenshtein distance over token sequences (activities, not characters).

use alloc::vec::Vec;

use crate::TraceVariant;

/// Unit-cost edit distance and its normalization by the longer length.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EditDistance {
    pub raw: usize,
    /// `raw / max(len_a, len_b)`, zero when both sequences are empty.
    pub normalized: f64,
}

/// Minimum number of insertions, deletions and substitutions turning `a`
/// into `b`.
pub fn distance<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = alloc::vec![0; b.len() + 1];
    for (i, x) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let substitution = prev[j] + usize::from(x != y);
            cur[j + 1] = substitution.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        core::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

pub fn edit_distance<T: PartialEq>(a: &[T], b: &[T]) -> EditDistance {
    let raw = distance(a, b);
    let longest = a.len().max(b.len());
    EditDistance {
        raw,
        normalized: if longest == 0 {
            0.0
        } else {
            raw as f64 / longest as f64
        },
    }
}

/// Edit distance between two variants, one activity per token.
pub fn levenshtein(a: &TraceVariant, b: &TraceVariant) -> EditDistance {
    edit_distance(a.activities(), b.activities())
}
