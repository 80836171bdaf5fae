//! Adversaries and pseudo-regret accounting.
//!
//! An environment fixes the whole loss vector `l_t` for round `t` the first
//! time any part of it is requested, so the arm drawn at round `t` can never
//! influence it. The player only ever sees `observe(t, arm)`; the harness
//! may read `loss_vector(t)` for regret accounting.

mod adaptive;
mod replay;
mod stochastic;

pub use adaptive::{AdaptiveEnv, AdaptiveStrategy};
pub use replay::{LossTable, ReplayEnv};
pub use stochastic::StochasticEnv;

use crate::error::{invalid_arg, Result};
use crate::params::{ArmIndex, Loss};

pub trait Environment {
    fn arms(&self) -> usize;

    /// Full loss vector for round `t` (1-based).
    fn loss_vector(&mut self, t: u64) -> Result<&[f64]>;

    /// Loss of `arm` at round `t`, validated to lie in `[0, 1]`.
    fn observe(&mut self, t: u64, arm: ArmIndex) -> Result<Loss> {
        let k = self.arms();
        let losses = self.loss_vector(t)?;
        match losses.get(arm) {
            Some(&x) => Loss::new(x),
            None => invalid_arg(format!("arm {arm} out of range for {k} arms")),
        }
    }

    /// Tell the environment which arm was played at round `t`.
    fn record(&mut self, _t: u64, _arm: ArmIndex) {}
}

/// Same loss vector every round. `ConstantEnv::new(k, 1.0)` is the
/// always-loss-1 worst case for weight shrinkage.
#[derive(Debug, Clone)]
pub struct ConstantEnv {
    losses: Vec<f64>,
}

impl ConstantEnv {
    pub fn new(arms: usize, loss: f64) -> Result<Self> {
        Self::from_vector(vec![loss; arms])
    }

    pub fn from_vector(losses: Vec<f64>) -> Result<Self> {
        if losses.len() < 2 {
            return invalid_arg("need at least 2 arms");
        }
        for &x in &losses {
            Loss::new(x)?;
        }
        Ok(Self { losses })
    }
}

impl Environment for ConstantEnv {
    fn arms(&self) -> usize {
        self.losses.len()
    }

    fn loss_vector(&mut self, _t: u64) -> Result<&[f64]> {
        Ok(&self.losses)
    }
}

/// Cumulative player loss against cumulative per-arm losses.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretLedger {
    cum_player_loss: f64,
    cum_arm_loss: Vec<f64>,
    rounds: u64,
}

impl RegretLedger {
    pub fn new(arms: usize) -> Self {
        Self {
            cum_player_loss: 0.0,
            cum_arm_loss: vec![0.0; arms],
            rounds: 0,
        }
    }

    pub fn record(&mut self, losses: &[f64], arm: ArmIndex) {
        self.cum_player_loss += losses[arm];
        for (acc, &x) in self.cum_arm_loss.iter_mut().zip(losses) {
            *acc += x;
        }
        self.rounds += 1;
    }

    pub fn rounds(&self) -> u64 {
        self.rounds
    }

    pub fn cum_player_loss(&self) -> f64 {
        self.cum_player_loss
    }

    pub fn cum_arm_loss(&self) -> &[f64] {
        &self.cum_arm_loss
    }

    /// Best fixed arm in hindsight (lowest index on ties).
    pub fn best_arm(&self) -> ArmIndex {
        let mut best = 0;
        for (i, &x) in self.cum_arm_loss.iter().enumerate() {
            if x < self.cum_arm_loss[best] {
                best = i;
            }
        }
        best
    }

    /// Player loss minus the loss of the best fixed arm in hindsight.
    pub fn pseudo_regret(&self) -> f64 {
        self.cum_player_loss - self.cum_arm_loss[self.best_arm()]
    }
}
