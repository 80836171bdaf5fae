use crate::error::{invalid_state, Result};
use crate::params::ArmIndex;

/// Linear inverse-CDF scan. Computes the total on the fly.
pub fn naive_sample(weights: &[f64], u: f64) -> Result<(ArmIndex, f64)> {
    let total: f64 = weights.iter().sum();
    Ok((naive_sample_with_total(weights, total, u)?, total))
}

/// Linear inverse-CDF scan with `r = u * total`.
///
/// If rounding leaves `r` past the last prefix sum, the last positive-weight
/// arm is returned.
pub fn naive_sample_with_total(weights: &[f64], total: f64, u: f64) -> Result<ArmIndex> {
    if !(total > 0.0) {
        return invalid_state(format!("total weight {total} is not positive"));
    }
    let r = u * total;
    let mut acc = 0.0;
    let mut last_positive = None;
    for (i, &w) in weights.iter().enumerate() {
        acc += w;
        if w > 0.0 {
            if r < acc {
                return Ok(i);
            }
            last_positive = Some(i);
        }
    }
    match last_positive {
        Some(i) => Ok(i),
        None => invalid_state("all weights are zero"),
    }
}
