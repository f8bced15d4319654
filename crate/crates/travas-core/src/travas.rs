// SPDX-License-Identifier: Apache-2.0

//! Partition-selection release of trace variants.
//!
//! Every variant frequency receives one independent k-TSGD draw; the variant
//! is published with the noisy frequency when that frequency exceeds `k`
//! and dropped otherwise. No variant outside the input is ever produced.

use rand_core::RngCore;

use crate::tsgd::{DpParams, TsgdParams};
use crate::SimpleEventLog;

/// Anonymizes `log` under the budget `dp`.
///
/// Variants are visited in their canonical order so that a seeded stream
/// assigns the same draw to the same variant on every run.
pub fn anonymize<R: RngCore + ?Sized>(
    log: &SimpleEventLog,
    dp: &DpParams,
    rng: &mut R,
) -> SimpleEventLog {
    anonymize_with(log, &TsgdParams::from_dp(dp), rng)
}

/// Same as [`anonymize`] with precomputed noise parameters.
pub fn anonymize_with<R: RngCore + ?Sized>(
    log: &SimpleEventLog,
    params: &TsgdParams,
    rng: &mut R,
) -> SimpleEventLog {
    let threshold = i128::from(params.k());
    let mut released = SimpleEventLog::new();
    for (variant, frequency) in log.iter() {
        let noisy = i128::from(frequency) + i128::from(params.sample(rng).value());
        if noisy > threshold {
            released
                .add(variant.clone(), noisy as u64)
                .expect("noisy frequency exceeds k >= 1");
        }
    }
    released
}
