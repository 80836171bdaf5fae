//! Domain scalars, learning-rate schedules and the IPW estimator.

use crate::error::{invalid_arg, Result};

/// Index of an arm (or an expert, for EXP4) in `[0, K)`.
pub type ArmIndex = usize;

/// A loss in `[0, 1]`.
///
/// Out-of-range values are rejected rather than clamped: the regret
/// guarantees only hold for bounded losses.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Loss(f64);

impl Loss {
    pub const ZERO: Loss = Loss(0.0);
    pub const ONE: Loss = Loss(1.0);

    pub fn new(value: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&value) {
            return invalid_arg(format!("loss {value} outside [0, 1]"));
        }
        Ok(Loss(value))
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Loss {
    type Error = crate::Error;

    fn try_from(value: f64) -> Result<Self> {
        Loss::new(value)
    }
}

/// A positive, finite learning rate.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct LearningRate(f64);

impl LearningRate {
    pub fn new(value: f64) -> Result<Self> {
        if !(value.is_finite() && value > 0.0) {
            return invalid_arg(format!(
                "learning rate must be positive and finite, got {value}"
            ));
        }
        Ok(LearningRate(value))
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }
}

/// Arm count, optional known horizon and the learning rate derived from them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HorizonParams {
    pub arms: usize,
    pub horizon: Option<u64>,
    pub eta: LearningRate,
}

impl HorizonParams {
    /// Fixed-horizon parameters with `eta = fixed_eta(arms, horizon)`.
    pub fn fixed(arms: usize, horizon: u64) -> Result<Self> {
        Ok(Self {
            arms,
            horizon: Some(horizon),
            eta: fixed_eta(arms, horizon)?,
        })
    }

    /// True when `T >= 2 K ln K`, the regime in which the snapshot sampler
    /// needs at most e^2 attempts in expectation.
    pub fn in_acceptance_regime(&self) -> bool {
        match self.horizon {
            Some(t) => t as f64 >= 2.0 * self.arms as f64 * (self.arms as f64).ln(),
            None => true,
        }
    }
}

fn check_arms(k: usize) -> Result<()> {
    if k < 2 {
        return invalid_arg(format!("need at least 2 arms, got {k}"));
    }
    Ok(())
}

/// `sqrt(2 ln K / (K T))`, the fixed-horizon EXP3 learning rate.
pub fn fixed_eta(k: usize, horizon: u64) -> Result<LearningRate> {
    check_arms(k)?;
    if horizon < 1 {
        return invalid_arg("horizon must be at least 1");
    }
    let k = k as f64;
    LearningRate::new((2.0 * k.ln() / (k * horizon as f64)).sqrt())
}

/// `sqrt(ln K / (K t))`, the anytime learning rate for round `t`.
pub fn anytime_eta(k: usize, t: u64) -> Result<LearningRate> {
    check_arms(k)?;
    if t < 1 {
        return invalid_arg("round index must be at least 1");
    }
    let k = k as f64;
    LearningRate::new((k.ln() / (k * t as f64)).sqrt())
}

/// Last round of the `K`-round block containing `t`, i.e. `ceil(t / K) * K`.
pub fn block_end(t: u64, k: usize) -> Result<u64> {
    check_arms(k)?;
    if t < 1 {
        return invalid_arg("round index must be at least 1");
    }
    let k = k as u64;
    Ok(t.div_ceil(k) * k)
}

/// Inverse-probability-weighted loss estimate `loss / p`.
pub fn ipw_estimate(loss: Loss, p: f64) -> Result<f64> {
    if !(p > 0.0 && p <= 1.0 + 1e-12) {
        return invalid_arg(format!("selection probability {p} outside (0, 1]"));
    }
    Ok(loss.value() / p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs()
    }

    #[test]
    fn fixed_eta_values() {
        let eta = fixed_eta(2, 6).unwrap().value();
        assert!(close(eta, (2.0 * 2f64.ln() / 12.0).sqrt(), 1e-15));
        // sqrt(2 ln 10 / 200000), 40-digit reference
        let a = fixed_eta(10, 20_000).unwrap().value();
        assert!(close(
            a,
            0.004798525912188081207567368868904801527654,
            1e-14
        ));
        let b = fixed_eta(10, 200_000).unwrap().value();
        assert!(close(a / b, 10f64.sqrt(), 1e-14));
    }

    #[test]
    fn fixed_eta_rejects_bad_input() {
        assert!(fixed_eta(1, 10).is_err());
        assert!(fixed_eta(2, 0).is_err());
    }

    #[test]
    fn anytime_eta_values() {
        let a = anytime_eta(2, 1).unwrap().value();
        assert!(close(a, 0.5887050112577373455057846632298498188737, 1e-14));
        let b = anytime_eta(10, 100).unwrap().value();
        assert!(close(b, 0.04798525912188081207567368868904801527654, 1e-14));
        for s in [1u64, 3, 17, 1000] {
            let r = anytime_eta(7, s).unwrap().value() / anytime_eta(7, 4 * s).unwrap().value();
            assert!(close(r, 2.0, 1e-15));
        }
        assert!(anytime_eta(10, 0).is_err());
    }

    #[test]
    fn block_end_values() {
        assert_eq!(block_end(1, 10).unwrap(), 10);
        assert_eq!(block_end(10, 10).unwrap(), 10);
        assert_eq!(block_end(11, 10).unwrap(), 20);
        assert!(block_end(0, 10).is_err());
    }

    #[test]
    fn ipw_values() {
        assert_eq!(ipw_estimate(Loss::ZERO, 0.3).unwrap(), 0.0);
        assert_eq!(ipw_estimate(Loss::ONE, 0.25).unwrap(), 4.0);
        assert_eq!(ipw_estimate(Loss::new(0.5).unwrap(), 0.1).unwrap(), 5.0);
        assert!(ipw_estimate(Loss::ONE, 0.0).is_err());
        assert!(ipw_estimate(Loss::ONE, -0.1).is_err());
    }

    #[test]
    fn loss_range_enforced() {
        assert!(Loss::new(-0.01).is_err());
        assert!(Loss::new(1.01).is_err());
        assert!(Loss::new(f64::NAN).is_err());
        assert!(Loss::new(1.0).is_ok());
    }

    #[test]
    fn acceptance_regime() {
        assert!(!HorizonParams::fixed(10, 10).unwrap().in_acceptance_regime());
        assert!(HorizonParams::fixed(10, 47).unwrap().in_acceptance_regime());
    }

    proptest! {
        #[test]
        fn anytime_eta_strictly_decreasing(k in 2usize..500, t in 2u64..1_000_000) {
            let here = anytime_eta(k, t).unwrap().value();
            prop_assert!(anytime_eta(k, t + 1).unwrap().value() < here);
            // ln K / K peaks at K = e, so the rate only decreases in K from 3 on.
            if k >= 3 {
                prop_assert!(anytime_eta(k + 1, t).unwrap().value() < here);
            } else {
                prop_assert!(anytime_eta(3, t).unwrap().value() > here);
            }
        }

        #[test]
        fn eta_k_at_most_one_in_regime(k in 2usize..2000, extra in 0u64..1_000_000) {
            let kf = k as f64;
            let t = (2.0 * kf * kf.ln()).ceil() as u64 + extra;
            let eta = fixed_eta(k, t).unwrap().value();
            prop_assert!(eta * kf <= 1.0 + 1e-12);
        }

        #[test]
        fn block_end_bounds(t in 1u64..1_000_000, k in 2usize..300) {
            let end = block_end(t, k).unwrap();
            prop_assert!(end >= t && end - t < k as u64);
            prop_assert_eq!(end % k as u64, 0);
            // constant over the block
            let start = end - k as u64 + 1;
            prop_assert_eq!(block_end(start, k).unwrap(), end);
        }
    }
}
