//! Rejection-sampling attempts of the snapshot backend, block by block.

use std::io::Write;

use exp3_core::{Backend, EngineConfig, Exp3Engine, HorizonParams, UniformSource};
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::error::{invalid, Result};
use crate::player::build_env;
use crate::regret::RunContext;

/// Attempts over one rebuild period, pooled across seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockRow {
    pub block: u64,
    pub start_t: u64,
    pub rounds: u64,
    pub mean_attempts: f64,
    pub max_attempts: u32,
}

#[derive(Debug, Clone)]
pub struct AcceptReport {
    pub config_hash: String,
    pub in_regime: bool,
    pub warning: Option<String>,
    pub blocks: Vec<BlockRow>,
    pub global_mean: f64,
    /// Largest block mean seen in any single seed's run.
    pub worst_single_run_block_mean: f64,
    /// Largest attempt count on the first round after a rebuild.
    pub max_first_round_attempts: u32,
}

struct SeedTrace {
    block_sums: Vec<u64>,
    block_max: Vec<u32>,
    max_first: u32,
}

fn run_seed(cfg: &ExperimentConfig, seed: u64, ctx: &RunContext, period: u64) -> Result<SeedTrace> {
    let engine_cfg = EngineConfig::new(Backend::AliasSnapshot).with_rebuild_period(period as usize);
    let mut engine = Exp3Engine::with_config(cfg.k, cfg.t, engine_cfg, UniformSource::new(seed))?;
    let mut env = build_env(cfg, seed, ctx.replay.as_ref())?;
    let blocks = cfg.t.div_ceil(period) as usize;
    let mut trace = SeedTrace {
        block_sums: vec![0; blocks],
        block_max: vec![0; blocks],
        max_first: 0,
    };
    for t in 1..=cfg.t {
        let s = engine.select_arm()?;
        let b = ((t - 1) / period) as usize;
        trace.block_sums[b] += s.attempts as u64;
        trace.block_max[b] = trace.block_max[b].max(s.attempts);
        if (t - 1) % period == 0 {
            trace.max_first = trace.max_first.max(s.attempts);
        }
        let loss = env.observe(t, s.arm)?;
        engine.update(s.arm, loss)?;
        env.record(t, s.arm);
    }
    Ok(trace)
}

pub fn run_accept_rate(cfg: &ExperimentConfig) -> Result<AcceptReport> {
    cfg.validate()?;
    if cfg.backend != Backend::AliasSnapshot {
        return invalid("accept-rate measures the alias_snapshot backend only");
    }
    let params = HorizonParams::fixed(cfg.k, cfg.t)?;
    let in_regime = params.in_acceptance_regime();
    let warning = (!in_regime).then(|| {
        format!(
            "t = {} < 2 k ln k for k = {}: the e^2 attempt bound does not apply",
            cfg.t, cfg.k
        )
    });
    let period = cfg.rebuild_period.unwrap_or(cfg.k) as u64;
    let ctx = RunContext::load(cfg)?;
    let traces: Vec<SeedTrace> = cfg
        .seeds
        .par_iter()
        .map(|&seed| run_seed(cfg, seed, &ctx, period))
        .collect::<Result<_>>()?;

    let n_blocks = cfg.t.div_ceil(period);
    let seeds = traces.len() as f64;
    let mut blocks = Vec::with_capacity(n_blocks as usize);
    let mut worst = 0.0f64;
    let mut total = 0u64;
    for b in 0..n_blocks {
        let start_t = b * period + 1;
        let rounds = period.min(cfg.t - b * period);
        let sum: u64 = traces.iter().map(|tr| tr.block_sums[b as usize]).sum();
        total += sum;
        for tr in &traces {
            worst = worst.max(tr.block_sums[b as usize] as f64 / rounds as f64);
        }
        blocks.push(BlockRow {
            block: b,
            start_t,
            rounds,
            mean_attempts: sum as f64 / (rounds as f64 * seeds),
            max_attempts: traces
                .iter()
                .map(|tr| tr.block_max[b as usize])
                .max()
                .unwrap_or(0),
        });
    }
    Ok(AcceptReport {
        config_hash: cfg.hash(),
        in_regime,
        warning,
        blocks,
        global_mean: total as f64 / (cfg.t as f64 * seeds),
        worst_single_run_block_mean: worst,
        max_first_round_attempts: traces.iter().map(|tr| tr.max_first).max().unwrap_or(0),
    })
}

impl AcceptReport {
    pub fn max_block_mean(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| b.mean_attempts)
            .fold(0.0, f64::max)
    }
}

/// Columns: `config_hash,kind,block,start_t,rounds,mean_attempts,
/// max_attempts,regime`. The last row (`kind = global`) holds the mean over
/// all rounds and seeds; `regime` is `ok` or `outside_regime`.
pub fn write_accept_csv(report: &AcceptReport, out: impl Write) -> Result<()> {
    let regime = if report.in_regime {
        "ok"
    } else {
        "outside_regime"
    };
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "config_hash",
        "kind",
        "block",
        "start_t",
        "rounds",
        "mean_attempts",
        "max_attempts",
        "regime",
    ])?;
    for b in &report.blocks {
        w.write_record([
            report.config_hash.clone(),
            "block".into(),
            b.block.to_string(),
            b.start_t.to_string(),
            b.rounds.to_string(),
            b.mean_attempts.to_string(),
            b.max_attempts.to_string(),
            regime.into(),
        ])?;
    }
    let rounds: u64 = report.blocks.iter().map(|b| b.rounds).sum();
    let max = report
        .blocks
        .iter()
        .map(|b| b.max_attempts)
        .max()
        .unwrap_or(0);
    w.write_record([
        report.config_hash.clone(),
        "global".into(),
        String::new(),
        "1".into(),
        rounds.to_string(),
        report.global_mean.to_string(),
        max.to_string(),
        regime.into(),
    ])?;
    w.flush()?;
    Ok(())
}
