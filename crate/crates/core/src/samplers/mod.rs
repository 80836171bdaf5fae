//! Weighted-sampling backends.
//!
//! All backends share the half-open inverse-CDF convention: arm `i` owns the
//! interval `[sum_{j<i} w_j, sum_{j<=i} w_j)` of the total mass.

mod alias;
mod builder;
mod naive;
mod segtree;
mod snapshot;

pub use alias::{AliasBin, AliasTable};
pub use builder::{BuildProgress, IncrementalBuilder, DEFAULT_WORK_BUDGET};
pub use naive::{naive_sample, naive_sample_with_total};
pub use segtree::SegTree;
pub use snapshot::{SnapshotSampler, MAX_ATTEMPTS};

use crate::error::{invalid_arg, Result};

pub(crate) fn validate_weights(weights: &[f64]) -> Result<f64> {
    if weights.len() < 2 {
        return invalid_arg(format!("need at least 2 weights, got {}", weights.len()));
    }
    if weights.len() > u32::MAX as usize {
        return invalid_arg("at most 2^32 - 1 weights are supported");
    }
    let mut total = 0.0;
    for (i, &w) in weights.iter().enumerate() {
        if !(w.is_finite() && w >= 0.0) {
            return invalid_arg(format!(
                "weight {i} is {w}; weights must be finite and >= 0"
            ));
        }
        total += w;
    }
    if !(total > 0.0 && total.is_finite()) {
        return invalid_arg(format!(
            "total weight must be positive and finite, got {total}"
        ));
    }
    Ok(total)
}
