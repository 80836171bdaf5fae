use crate::error::{invalid_arg, Result};
use crate::params::ArmIndex;

use super::Environment;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdaptiveStrategy {
    /// Loss 1 on the arm pulled most often so far (lowest index on ties),
    /// 0 elsewhere. All zeros before any pull.
    TargetMostPulled,
}

/// Adversary reacting to the history of played arms.
///
/// The loss vector of round `t` is computed from the pulls recorded for
/// rounds `1..t` and cached, so it never depends on the round-`t` draw.
#[derive(Debug, Clone)]
pub struct AdaptiveEnv {
    strategy: AdaptiveStrategy,
    pulls: Vec<u64>,
    cached_round: Option<u64>,
    cache: Vec<f64>,
}

impl AdaptiveEnv {
    pub fn new(arms: usize, strategy: AdaptiveStrategy) -> Result<Self> {
        if arms < 2 {
            return invalid_arg("need at least 2 arms");
        }
        Ok(Self {
            strategy,
            pulls: vec![0; arms],
            cached_round: None,
            cache: vec![0.0; arms],
        })
    }

    pub fn pulls(&self) -> &[u64] {
        &self.pulls
    }
}

impl Environment for AdaptiveEnv {
    fn arms(&self) -> usize {
        self.pulls.len()
    }

    fn loss_vector(&mut self, t: u64) -> Result<&[f64]> {
        if self.cached_round != Some(t) {
            self.cache.iter_mut().for_each(|x| *x = 0.0);
            match self.strategy {
                AdaptiveStrategy::TargetMostPulled => {
                    let mut target = 0;
                    for (i, &n) in self.pulls.iter().enumerate() {
                        if n > self.pulls[target] {
                            target = i;
                        }
                    }
                    if self.pulls[target] > 0 {
                        self.cache[target] = 1.0;
                    }
                }
            }
            self.cached_round = Some(t);
        }
        Ok(&self.cache)
    }

    fn record(&mut self, _t: u64, arm: ArmIndex) {
        self.pulls[arm] += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_history_means_no_loss() {
        let mut env = AdaptiveEnv::new(3, AdaptiveStrategy::TargetMostPulled).unwrap();
        assert_eq!(env.loss_vector(1).unwrap(), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn targets_most_pulled() {
        let mut env = AdaptiveEnv::new(3, AdaptiveStrategy::TargetMostPulled).unwrap();
        let mut t = 1;
        for _ in 0..10 {
            env.record(t, 0);
            t += 1;
        }
        for _ in 0..2 {
            env.record(t, 1);
            t += 1;
        }
        assert_eq!(env.loss_vector(t).unwrap(), &[1.0, 0.0, 0.0]);
    }

    #[test]
    fn ties_target_lowest_index() {
        let mut env = AdaptiveEnv::new(4, AdaptiveStrategy::TargetMostPulled).unwrap();
        env.record(1, 2);
        env.record(2, 1);
        assert_eq!(env.loss_vector(3).unwrap(), &[0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn vector_fixed_before_play() {
        let mut env = AdaptiveEnv::new(3, AdaptiveStrategy::TargetMostPulled).unwrap();
        env.record(1, 2);
        let before = env.loss_vector(2).unwrap().to_vec();
        env.observe(2, 1).unwrap();
        env.record(2, 1);
        env.record(2, 1);
        assert_eq!(env.loss_vector(2).unwrap(), before.as_slice());
    }
}
