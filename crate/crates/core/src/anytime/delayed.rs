use crate::error::{invalid_arg, Error, Result};
use crate::exp3::{Backend, EngineConfig, EngineStats, Exp3Engine};
use crate::params::{anytime_eta, block_end, ipw_estimate, ArmIndex, Loss};
use crate::policy::{Policy, Selection};
use crate::rng::UniformSource;
use crate::weights::WeightState;

/// Anytime EXP3 whose learning rate on round `t` is `eta_{tau(t)}` with
/// `tau(t) = ceil(t / K) K`.
///
/// The cumulative estimates `Lhat` are the master state. Inside a block the
/// wrapped engine applies ordinary multiplicative updates with the block's
/// constant rate; at `t = bK` every weight is recomputed as
/// `exp(-eta_{(b+1)K} Lhat)` and the sampler is rebuilt.
#[derive(Debug, Clone)]
pub struct DelayedUpdateEngine {
    inner: Exp3Engine,
    cum_est: Vec<f64>,
}

impl DelayedUpdateEngine {
    pub fn new(arms: usize, backend: Backend, seed: u64) -> Result<Self> {
        Self::with_config(arms, EngineConfig::new(backend), UniformSource::new(seed))
    }

    pub fn with_config(arms: usize, config: EngineConfig, rng: UniformSource) -> Result<Self> {
        let eta = anytime_eta(arms, arms as u64)?;
        let config = EngineConfig {
            rebuild_period: Some(arms),
            ..config
        };
        Ok(Self {
            inner: Exp3Engine::with_eta(arms, eta, config, rng)?,
            cum_est: vec![0.0; arms],
        })
    }

    pub fn arms(&self) -> usize {
        self.cum_est.len()
    }

    pub fn round(&self) -> u64 {
        self.inner.round()
    }

    /// Learning rate in force for the current round.
    pub fn eta(&self) -> f64 {
        self.inner.eta().value()
    }

    /// `eta_{tau(t)}` from the formula, for comparison against [`Self::eta`].
    pub fn scheduled_eta(arms: usize, t: u64) -> Result<f64> {
        Ok(anytime_eta(arms, block_end(t, arms)?)?.value())
    }

    pub fn cum_estimates(&self) -> &[f64] {
        &self.cum_est
    }

    pub fn state(&self) -> &WeightState {
        self.inner.state()
    }

    pub fn stats(&self) -> EngineStats {
        self.inner.stats()
    }

    pub fn inner(&self) -> &Exp3Engine {
        &self.inner
    }

    pub fn select_arm(&mut self) -> Result<Selection> {
        self.inner.select_arm()
    }

    pub fn update(&mut self, arm: ArmIndex, loss: Loss) -> Result<()> {
        if arm >= self.arms() {
            return invalid_arg(format!("arm {arm} out of range for {} arms", self.arms()));
        }
        let p = self.inner.state().prob(arm);
        let estimate = ipw_estimate(loss, p)
            .map_err(|e| Error::InvalidState(format!("corrupted weight state: {e}")))?;
        self.apply(arm, estimate)
    }

    /// Feed an estimate directly, bypassing the importance weighting.
    pub fn apply(&mut self, arm: ArmIndex, estimate: f64) -> Result<()> {
        if arm >= self.arms() {
            return invalid_arg(format!("arm {arm} out of range for {} arms", self.arms()));
        }
        if !(estimate >= 0.0 && estimate.is_finite()) {
            return invalid_arg(format!(
                "estimate {estimate} must be finite and nonnegative"
            ));
        }
        let t = self.inner.round();
        let k = self.arms() as u64;
        self.cum_est[arm] += estimate;
        self.inner.apply_estimate(arm, estimate);
        self.inner.set_touched(1);
        if t % k == 0 {
            let eta = anytime_eta(self.arms(), t + k)?;
            let lr = eta.value();
            self.inner
                .end_round_with_reload(self.cum_est.iter().map(|l| -lr * l), eta)
        } else {
            self.inner.end_round()
        }
    }
}

impl Policy for DelayedUpdateEngine {
    fn arms(&self) -> usize {
        DelayedUpdateEngine::arms(self)
    }

    fn round(&self) -> u64 {
        self.inner.round()
    }

    fn select(&mut self) -> Result<Selection> {
        self.select_arm()
    }

    fn update(&mut self, selection: &Selection, loss: Loss) -> Result<()> {
        DelayedUpdateEngine::update(self, selection.arm, loss)
    }
}
