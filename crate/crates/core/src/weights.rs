//! Exponential-weights state kept in the log domain.
//!
//! `log_weights` is the master copy and never underflows. Raw weights are
//! mirrored as `exp(log_weight - scale)`; `total` is the running sum of the
//! raw mirrors. Arms more than ~745 nats below the current scale flush to a
//! raw weight of zero; their probability is below `e^-745` and they are
//! unreachable by every sampler.

use crate::error::{invalid_arg, Result};
use crate::params::{ArmIndex, LearningRate};

/// Raw totals below this trigger a renormalization.
pub const RENORMALIZE_BELOW: f64 = 1e-100;

/// The running total is maintained by subtraction, so its absolute error is
/// relative to the largest total seen since the last exact sum. Once the
/// total has shrunk by this factor it is recomputed from scratch.
pub const RESYNC_SHRINK: f64 = 3.354_626_279_025_118_4e-4; // e^-8

#[derive(Debug, Clone)]
pub struct WeightState {
    log_weights: Vec<f64>,
    raw: Vec<f64>,
    scale: f64,
    total: f64,
    reference_total: f64,
    eta: LearningRate,
    renormalizations: u64,
}

impl WeightState {
    /// All weights 1, `W = K`.
    pub fn uniform(arms: usize, eta: LearningRate) -> Result<Self> {
        if arms < 2 {
            return invalid_arg(format!("need at least 2 arms, got {arms}"));
        }
        Ok(Self {
            log_weights: vec![0.0; arms],
            raw: vec![1.0; arms],
            scale: 0.0,
            total: arms as f64,
            reference_total: arms as f64,
            eta,
            renormalizations: 0,
        })
    }

    pub fn arms(&self) -> usize {
        self.log_weights.len()
    }

    pub fn eta(&self) -> LearningRate {
        self.eta
    }

    pub fn set_eta(&mut self, eta: LearningRate) {
        self.eta = eta;
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    pub fn raw(&self) -> &[f64] {
        &self.raw
    }

    #[inline]
    pub fn raw_weight(&self, arm: ArmIndex) -> f64 {
        self.raw[arm]
    }

    /// Running `W_raw`.
    #[inline]
    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// `ln W` in absolute (unscaled) terms.
    pub fn log_total(&self) -> f64 {
        self.total.ln() + self.scale
    }

    /// `w_arm / W` from the running total. A dominant arm can exceed the
    /// drifted total by a few ulps, hence the clamp.
    #[inline]
    pub fn prob(&self, arm: ArmIndex) -> f64 {
        (self.raw[arm] / self.total).min(1.0)
    }

    pub fn probabilities(&self) -> Vec<f64> {
        let exact: f64 = self.raw.iter().sum();
        self.raw.iter().map(|w| w / exact).collect()
    }

    pub fn renormalizations(&self) -> u64 {
        self.renormalizations
    }

    /// Multiply arm's weight by `exp(-eta * estimate)`. Returns the old and new
    /// raw weight.
    #[inline]
    pub fn apply(&mut self, arm: ArmIndex, estimate: f64) -> (f64, f64) {
        self.log_weights[arm] -= self.eta.value() * estimate;
        let old = self.raw[arm];
        let new = (self.log_weights[arm] - self.scale).exp();
        self.raw[arm] = new;
        self.total -= old - new;
        (old, new)
    }

    pub fn needs_renormalization(&self) -> bool {
        !(self.total >= RENORMALIZE_BELOW
            && self.total >= self.reference_total * RESYNC_SHRINK
            && self.total.is_finite())
    }

    /// Shift the scale so the largest raw weight is exactly 1, recompute every
    /// raw mirror and the total. O(K).
    pub fn renormalize(&mut self) {
        self.scale = self
            .log_weights
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        for (r, &lw) in self.raw.iter_mut().zip(&self.log_weights) {
            *r = (lw - self.scale).exp();
        }
        self.total = self.raw.iter().sum();
        self.reference_total = self.total;
        self.renormalizations += 1;
    }

    /// Replace every log weight and renormalize.
    pub fn load_log_weights(&mut self, log_weights: impl IntoIterator<Item = f64>) {
        for (dst, lw) in self.log_weights.iter_mut().zip(log_weights) {
            *dst = lw;
        }
        self.renormalize();
    }

    /// Overwrite the running total with an exactly computed one.
    #[inline]
    pub fn set_total(&mut self, total: f64) {
        self.total = total;
        self.reference_total = total;
    }

    /// Sum of raw mirrors computed from scratch.
    pub fn exact_total(&self) -> f64 {
        self.raw.iter().sum()
    }
}
