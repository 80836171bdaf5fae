//! Builds the policy and environment named by a config.

use exp3_core::{
    AdaptiveEnv, AdaptiveStrategy, ConstantEnv, DelayedUpdateEngine, DoublingWrapper, EngineConfig,
    Environment, Exp3Engine, Exp4Engine, Exp4Policy, FtrlAnytimeEngine, LossTable, PartitionOracle,
    Policy, ReplayEnv, StochasticEnv, UniformSource,
};

use crate::config::{Algorithm, EnvSpec, ExperimentConfig};
use crate::error::{invalid, Result};

pub enum Player {
    Fixed(Exp3Engine),
    Doubling(DoublingWrapper),
    Ftrl(FtrlAnytimeEngine),
    Delayed(DelayedUpdateEngine),
    Exp4(Exp4Policy<PartitionOracle>),
}

impl Player {
    /// The player's random stream is `UniformSource::new(seed)`.
    pub fn build(
        cfg: &ExperimentConfig,
        seed: u64,
        oracle: Option<&PartitionOracle>,
    ) -> Result<Self> {
        let mut engine_cfg = EngineConfig::new(cfg.backend).with_work_budget(cfg.work_budget);
        if let Some(p) = cfg.rebuild_period {
            engine_cfg = engine_cfg.with_rebuild_period(p);
        }
        let rng = UniformSource::new(seed);
        Ok(match cfg.algorithm {
            Algorithm::Exp3Fixed => {
                Player::Fixed(Exp3Engine::with_config(cfg.k, cfg.t, engine_cfg, rng)?)
            }
            Algorithm::Doubling => Player::Doubling(DoublingWrapper::new(cfg.k, engine_cfg, rng)?),
            Algorithm::Ftrl => Player::Ftrl(FtrlAnytimeEngine::new(cfg.k, rng)?),
            Algorithm::Delayed => {
                Player::Delayed(DelayedUpdateEngine::with_config(cfg.k, engine_cfg, rng)?)
            }
            Algorithm::Exp4 => {
                let oracle = match oracle {
                    Some(o) => o.clone(),
                    None => cfg.load_oracle()?,
                };
                let engine = Exp4Engine::with_config(
                    exp3_core::ExpertOracle::experts(&oracle),
                    cfg.t,
                    engine_cfg,
                    rng,
                )?;
                Player::Exp4(Exp4Policy::new(engine, oracle)?)
            }
        })
    }

    pub fn policy(&mut self) -> &mut dyn Policy {
        match self {
            Player::Fixed(p) => p,
            Player::Doubling(p) => p,
            Player::Ftrl(p) => p,
            Player::Delayed(p) => p,
            Player::Exp4(p) => p,
        }
    }

    /// O(K) sampler rebuilds so far.
    pub fn rebuilds(&self) -> u64 {
        match self {
            Player::Fixed(p) => p.stats().rebuilds,
            Player::Doubling(p) => p.inner().stats().rebuilds,
            Player::Ftrl(_) => 0,
            Player::Delayed(p) => p.stats().rebuilds,
            Player::Exp4(p) => p.engine().stats().rebuilds,
        }
    }
}

/// Environment for one seed. Stochastic losses come from per-round streams
/// of `seed`, disjoint from the player's stream.
pub fn build_env(
    cfg: &ExperimentConfig,
    seed: u64,
    replay: Option<&LossTable>,
) -> Result<Box<dyn Environment + Send>> {
    Ok(match &cfg.env {
        EnvSpec::Gap(g) => Box::new(StochasticEnv::with_gap(cfg.k, *g, seed)?),
        EnvSpec::Means(m) => Box::new(StochasticEnv::new(m.clone(), seed)?),
        EnvSpec::Constant(l) => Box::new(ConstantEnv::new(cfg.k, *l)?),
        EnvSpec::Adaptive => Box::new(AdaptiveEnv::new(cfg.k, AdaptiveStrategy::TargetMostPulled)?),
        EnvSpec::Replay(_) => match replay {
            Some(table) => Box::new(ReplayEnv::new(table.clone())),
            None => return invalid("replay table not loaded"),
        },
    })
}
