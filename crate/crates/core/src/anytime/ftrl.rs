use crate::error::{invalid_arg, Error, Result};
use crate::params::{anytime_eta, ipw_estimate, ArmIndex, Loss};
use crate::policy::{Policy, Selection};
use crate::rng::UniformSource;
use crate::samplers::naive_sample_with_total;

/// Anytime EXP3 with `w_{t+1,i} = exp(-eta_t * Lhat_{t,i})`.
///
/// Every round recomputes all K weights with the current learning rate and
/// samples by a linear scan: O(K) per round, kept as the exact reference.
#[derive(Debug, Clone)]
pub struct FtrlAnytimeEngine {
    cum_est: Vec<f64>,
    weights: Vec<f64>,
    round: u64,
    rng: UniformSource,
}

impl FtrlAnytimeEngine {
    pub fn new(arms: usize, rng: UniformSource) -> Result<Self> {
        if arms < 2 {
            return invalid_arg("need at least 2 arms");
        }
        Ok(Self {
            cum_est: vec![0.0; arms],
            weights: vec![1.0; arms],
            round: 1,
            rng,
        })
    }

    pub fn arms(&self) -> usize {
        self.cum_est.len()
    }

    pub fn cum_estimates(&self) -> &[f64] {
        &self.cum_est
    }

    /// Learning rate used to form the distribution of the current round:
    /// `eta_{t-1}`, with `eta_1` at `t = 1` where all estimates are zero.
    pub fn eta(&self) -> f64 {
        anytime_eta(self.arms(), (self.round - 1).max(1))
            .expect("arms >= 2")
            .value()
    }

    /// Fill `weights` relative to the smallest estimate and return their sum.
    fn refresh(&mut self) -> f64 {
        let eta = self.eta();
        let min = self.cum_est.iter().copied().fold(f64::INFINITY, f64::min);
        let mut total = 0.0;
        for (w, &l) in self.weights.iter_mut().zip(&self.cum_est) {
            *w = (-eta * (l - min)).exp();
            total += *w;
        }
        total
    }

    pub fn probabilities(&mut self) -> Vec<f64> {
        let total = self.refresh();
        self.weights.iter().map(|w| w / total).collect()
    }

    /// Add an importance-weighted estimate to one arm and advance a round.
    pub fn add_estimate(&mut self, arm: ArmIndex, estimate: f64) -> Result<()> {
        if arm >= self.arms() {
            return invalid_arg(format!("arm {arm} out of range"));
        }
        if !(estimate >= 0.0 && estimate.is_finite()) {
            return invalid_arg(format!(
                "estimate {estimate} must be finite and nonnegative"
            ));
        }
        self.cum_est[arm] += estimate;
        self.round += 1;
        Ok(())
    }
}

impl Policy for FtrlAnytimeEngine {
    fn arms(&self) -> usize {
        FtrlAnytimeEngine::arms(self)
    }

    fn round(&self) -> u64 {
        self.round
    }

    fn select(&mut self) -> Result<Selection> {
        let total = self.refresh();
        let arm = naive_sample_with_total(&self.weights, total, self.rng.next_f64())?;
        Ok(Selection {
            arm,
            prob: self.weights[arm] / total,
            attempts: 1,
        })
    }

    fn update(&mut self, selection: &Selection, loss: Loss) -> Result<()> {
        let estimate = ipw_estimate(loss, selection.prob)
            .map_err(|e| Error::InvalidState(format!("bad selection probability: {e}")))?;
        self.add_estimate(selection.arm, estimate)
    }
}
