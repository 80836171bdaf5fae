//! Measured counterpart of the summary table: per-round time at a large K and
//! regret coefficient at a small one, for every algorithm and backend.

use std::fmt::Write as _;

use exp3_core::Backend;

use crate::bench::{bench_policy, percentile, BenchConfig, PrecomputedLosses};
use crate::config::{Algorithm, ExperimentConfig};
use crate::error::Result;
use crate::player::Player;
use crate::regret::{regret_scale, run_regret};

#[derive(Debug, Clone)]
pub struct Table1Config {
    /// Base config for the regret columns (K, T, env, seeds).
    pub regret: ExperimentConfig,
    pub bench_k: usize,
    pub bench: BenchConfig,
}

impl Default for Table1Config {
    fn default() -> Self {
        Self {
            regret: ExperimentConfig::default(),
            bench_k: 4096,
            bench: BenchConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table1Row {
    pub algorithm: Algorithm,
    pub backend: Backend,
    pub median_ns: f64,
    pub mean_regret: f64,
    pub std_error: f64,
    pub coefficient: f64,
    pub coefficient_std_error: f64,
}

impl Table1Row {
    pub fn label(&self) -> String {
        match self.algorithm {
            Algorithm::Ftrl => "ftrl (naive scan)".into(),
            a => format!("{a} / {}", self.backend),
        }
    }
}

/// The rows: fixed-horizon EXP3 on every backend, then the anytime variants.
pub fn table1_variants() -> Vec<(Algorithm, Backend)> {
    let mut v: Vec<_> = Backend::ALL
        .iter()
        .map(|&b| (Algorithm::Exp3Fixed, b))
        .collect();
    v.push((Algorithm::Doubling, Backend::AliasSnapshot));
    v.push((Algorithm::Ftrl, Backend::Naive));
    v.push((Algorithm::Delayed, Backend::AliasSnapshot));
    v
}

pub fn run_table1(cfg: &Table1Config) -> Result<Vec<Table1Row>> {
    let mut rows = Vec::new();
    let horizon = cfg.bench.warmup + cfg.bench.rounds;
    let losses = PrecomputedLosses::generate(cfg.bench_k, horizon, cfg.bench.gap, cfg.bench.seed)?;
    for (algorithm, backend) in table1_variants() {
        let mut regret_cfg = cfg.regret.clone();
        regret_cfg.algorithm = algorithm;
        regret_cfg.backend = backend;
        let report = run_regret(&regret_cfg)?;

        let bench_cfg = ExperimentConfig {
            algorithm,
            backend,
            k: cfg.bench_k,
            t: horizon,
            ..cfg.regret.clone()
        };
        let mut player = Player::build(&bench_cfg, cfg.bench.seed, None)?;
        let (samples, _) =
            bench_policy(player.policy(), &losses, cfg.bench.warmup, cfg.bench.rounds)?;

        let scale = regret_scale(regret_cfg.k, regret_cfg.t);
        rows.push(Table1Row {
            algorithm,
            backend,
            median_ns: percentile(&samples, 0.5),
            mean_regret: report.summary.mean,
            std_error: report.summary.std_error,
            coefficient: report.summary.coefficient,
            coefficient_std_error: report.summary.std_error / scale,
        });
    }
    Ok(rows)
}

pub fn render_table1(rows: &[Table1Row], cfg: &Table1Config) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<36} {:>16} {:>22}",
        format!("algorithm / backend"),
        format!("median ns (K={})", cfg.bench_k),
        format!("coef (K={}, T={})", cfg.regret.k, cfg.regret.t),
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{:<36} {:>16.0} {:>14.4} ± {:.4}",
            r.label(),
            r.median_ns,
            r.coefficient,
            r.coefficient_std_error
        );
    }
    let _ = writeln!(
        out,
        "coef = mean pseudo-regret / sqrt(K T ln K) over {} seeds, ± one standard error",
        cfg.regret.seeds.len()
    );
    out
}
