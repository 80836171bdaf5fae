//! Pseudo-regret runs over many seeds.

use std::io::Write;

use exp3_core::RegretLedger;
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::player::{build_env, Player};

/// One checkpoint of one seed.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub seed: u64,
    pub t: u64,
    pub cum_pseudo_regret: f64,
    /// Only recorded when the config enables timing.
    pub mean_round_ns: Option<f64>,
    pub mean_attempts: f64,
    pub rebuild_count: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegretSummary {
    pub seeds: usize,
    pub t: u64,
    pub mean: f64,
    pub std_error: f64,
    /// `mean / sqrt(K T ln K)`.
    pub coefficient: f64,
    pub mean_attempts: f64,
}

#[derive(Debug, Clone)]
pub struct RegretReport {
    pub config_hash: String,
    pub rows: Vec<ResultRow>,
    pub summary: RegretSummary,
}

impl RegretReport {
    /// Final pseudo-regret per seed, in seed order.
    pub fn finals(&self) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| r.t == self.summary.t)
            .map(|r| r.cum_pseudo_regret)
            .collect()
    }
}

/// `sqrt(K T ln K)`, the scale of every regret bound here.
pub fn regret_scale(k: usize, t: u64) -> f64 {
    let k = k as f64;
    (k * t as f64 * k.ln()).sqrt()
}

/// Evenly spaced, strictly increasing, ending at `t`.
pub fn checkpoints(t: u64, count: usize) -> Vec<u64> {
    let count = count as u64;
    let mut out: Vec<u64> = (1..=count).map(|i| (i * t / count).max(1)).collect();
    out.dedup();
    out
}

pub fn mean_and_std_error(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

pub fn run_seed(cfg: &ExperimentConfig, seed: u64, ctx: &RunContext) -> Result<Vec<ResultRow>> {
    let mut player = Player::build(cfg, seed, ctx.oracle.as_ref())?;
    let mut env = build_env(cfg, seed, ctx.replay.as_ref())?;
    let mut ledger = RegretLedger::new(cfg.k);
    let marks = checkpoints(cfg.t, cfg.checkpoints);
    let mut next = marks.iter().peekable();
    let mut rows = Vec::with_capacity(marks.len());
    let (mut attempts, mut ns) = (0u64, 0u64);
    for t in 1..=cfg.t {
        let rec = player.policy().step(env.as_mut())?;
        ledger.record(env.loss_vector(rec.t)?, rec.arm);
        attempts += rec.attempts as u64;
        ns += rec.elapsed_ns;
        if next.peek() == Some(&&t) {
            next.next();
            rows.push(ResultRow {
                seed,
                t,
                cum_pseudo_regret: ledger.pseudo_regret(),
                mean_round_ns: cfg.timing.then(|| ns as f64 / t as f64),
                mean_attempts: attempts as f64 / t as f64,
                rebuild_count: player.rebuilds(),
            });
        }
    }
    Ok(rows)
}

/// Inputs shared by every seed, loaded once.
#[derive(Debug, Clone, Default)]
pub struct RunContext {
    pub replay: Option<exp3_core::LossTable>,
    pub oracle: Option<exp3_core::PartitionOracle>,
}

impl RunContext {
    pub fn load(cfg: &ExperimentConfig) -> Result<Self> {
        let oracle = match cfg.algorithm {
            crate::config::Algorithm::Exp4 => Some(cfg.load_oracle()?),
            _ => None,
        };
        Ok(Self {
            replay: cfg.load_replay()?,
            oracle,
        })
    }
}

/// Seeds run on the rayon pool; rows come back in seed order.
pub fn run_regret(cfg: &ExperimentConfig) -> Result<RegretReport> {
    cfg.validate()?;
    let ctx = RunContext::load(cfg)?;
    let per_seed: Vec<Vec<ResultRow>> = cfg
        .seeds
        .par_iter()
        .map(|&seed| run_seed(cfg, seed, &ctx))
        .collect::<Result<_>>()?;
    let finals: Vec<&ResultRow> = per_seed.iter().filter_map(|rows| rows.last()).collect();
    let regrets: Vec<f64> = finals.iter().map(|r| r.cum_pseudo_regret).collect();
    let (mean, std_error) = mean_and_std_error(&regrets);
    let mean_attempts = finals.iter().map(|r| r.mean_attempts).sum::<f64>() / finals.len() as f64;
    Ok(RegretReport {
        config_hash: cfg.hash(),
        rows: per_seed.into_iter().flatten().collect(),
        summary: RegretSummary {
            seeds: regrets.len(),
            t: cfg.t,
            mean,
            std_error,
            coefficient: mean / regret_scale(cfg.k, cfg.t),
            mean_attempts,
        },
    })
}

/// Columns: `config_hash,kind,seed,t,cum_pseudo_regret,std_error,coefficient,
/// mean_round_ns,mean_attempts,rebuild_count`. `kind` is `seed` for
/// checkpoint rows and `summary` for the final mean over seeds.
pub fn write_regret_csv(report: &RegretReport, out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "config_hash",
        "kind",
        "seed",
        "t",
        "cum_pseudo_regret",
        "std_error",
        "coefficient",
        "mean_round_ns",
        "mean_attempts",
        "rebuild_count",
    ])?;
    for r in &report.rows {
        w.write_record([
            report.config_hash.clone(),
            "seed".into(),
            r.seed.to_string(),
            r.t.to_string(),
            r.cum_pseudo_regret.to_string(),
            String::new(),
            String::new(),
            r.mean_round_ns.map_or(String::new(), |x| x.to_string()),
            r.mean_attempts.to_string(),
            r.rebuild_count.to_string(),
        ])?;
    }
    let s = &report.summary;
    w.write_record([
        report.config_hash.clone(),
        "summary".into(),
        String::new(),
        s.t.to_string(),
        s.mean.to_string(),
        s.std_error.to_string(),
        s.coefficient.to_string(),
        String::new(),
        s.mean_attempts.to_string(),
        String::new(),
    ])?;
    w.flush()?;
    Ok(())
}
