//! Experiment harness: regret runs, latency benchmarks, acceptance-rate
//! measurements and loss-table export, all driven by [`ExperimentConfig`].

pub mod accept;
pub mod bench;
pub mod config;
mod error;
pub mod player;
pub mod regret;
pub mod table1;

use std::path::Path;

use exp3_core::LossTable;

pub use config::{Algorithm, EnvSpec, ExperimentConfig};
pub use error::{HarnessError, Result};

/// Write the loss table the config's environment produces for `seed`.
pub fn export_env(cfg: &ExperimentConfig, seed: u64, out: &Path) -> Result<()> {
    cfg.validate()?;
    if cfg.env == EnvSpec::Adaptive {
        return Err(HarnessError::Invalid(
            "an adaptive environment depends on play and cannot be exported".into(),
        ));
    }
    let ctx = regret::RunContext::load(cfg)?;
    let mut env = player::build_env(cfg, seed, ctx.replay.as_ref())?;
    LossTable::capture(env.as_mut(), cfg.t)?.write_csv(out)?;
    Ok(())
}
