//! Adversarial multi-armed bandits: EXP3 and EXP4 with interchangeable
//! weighted-sampling backends, anytime variants and simple adversaries.
//!
//! ```
//! use exp3_core::{Backend, Exp3Engine, Loss};
//!
//! let mut engine = Exp3Engine::new(10, 50_000, Backend::AliasSnapshot, 7).unwrap();
//! let choice = engine.select_arm().unwrap();
//! engine.update(choice.arm, Loss::new(0.3).unwrap()).unwrap();
//! assert_eq!(engine.round(), 2);
//! ```

pub mod anytime;
pub mod env;
mod error;
pub mod exp3;
pub mod exp4;
pub mod params;
pub mod policy;
pub mod rng;
pub mod samplers;
pub mod weights;

pub use anytime::{DelayedUpdateEngine, DoublingWrapper, FtrlAnytimeEngine};
pub use env::{
    AdaptiveEnv, AdaptiveStrategy, ConstantEnv, Environment, LossTable, RegretLedger, ReplayEnv,
    StochasticEnv,
};
pub use error::{Error, Result};
pub use exp3::{Backend, EngineConfig, EngineStats, Exp3Engine};
pub use exp4::{
    Exp4Engine, Exp4Policy, Exp4Selection, ExpertOracle, IdentityOracle, PartitionOracle,
};
pub use params::{
    anytime_eta, block_end, fixed_eta, ipw_estimate, ArmIndex, HorizonParams, LearningRate, Loss,
};
pub use policy::{run_episode, Policy, RoundRecord, Selection};
pub use rng::UniformSource;
pub use weights::WeightState;
