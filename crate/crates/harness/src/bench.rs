//! Per-round latency with the losses generated before the timed loop.

use std::io::Write;
use std::time::Instant;

use exp3_core::{
    Backend, EngineConfig, Environment, Exp3Engine, Loss, Policy, StochasticEnv, UniformSource,
};

use crate::error::{invalid, Result};

/// Cap on precomputed loss cells, one bit each (128 KiB). Tables for large K
/// hold fewer rows and are replayed cyclically. Keeping the table in cache
/// keeps the lookup from dominating the timed loop.
pub const MAX_TABLE_CELLS: usize = 1 << 20;

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub ks: Vec<usize>,
    pub backends: Vec<Backend>,
    pub rounds: u64,
    pub warmup: u64,
    pub seed: u64,
    pub gap: f64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            ks: vec![256, 1024, 4096, 16384, 65536],
            backends: Backend::ALL.to_vec(),
            rounds: 100_000,
            warmup: 10_000,
            seed: 1,
            gap: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub k: usize,
    pub backend: String,
    pub rounds: u64,
    pub median_ns: f64,
    pub p99_ns: f64,
    pub mean_ns: f64,
    pub mean_attempts: f64,
    pub rebuilds: u64,
    /// Loss vectors the environment generated while the clock was running.
    pub env_calls_timed: u64,
}

/// Bernoulli loss table with at most [`MAX_TABLE_CELLS`] cells, as bits.
pub struct PrecomputedLosses {
    bits: Vec<u64>,
    arms: usize,
    rows: u64,
    env_calls: u64,
}

impl PrecomputedLosses {
    pub fn generate(k: usize, rounds: u64, gap: f64, seed: u64) -> Result<Self> {
        let rows = ((MAX_TABLE_CELLS / k).max(1) as u64).min(rounds.max(1));
        let mut env = StochasticEnv::with_gap(k, gap, seed)?;
        let cells = rows as usize * k;
        let mut bits = vec![0u64; cells.div_ceil(64)];
        for t in 1..=rows {
            let base = (t as usize - 1) * k;
            for (i, &x) in env.loss_vector(t)?.iter().enumerate() {
                if x == 1.0 {
                    let c = base + i;
                    bits[c / 64] |= 1 << (c % 64);
                }
            }
        }
        Ok(Self {
            bits,
            arms: k,
            rows,
            env_calls: env.generated_rounds(),
        })
    }

    #[inline]
    pub fn loss(&self, t: u64, arm: usize) -> Loss {
        let c = ((t - 1) % self.rows) as usize * self.arms + arm;
        if self.bits[c / 64] >> (c % 64) & 1 == 1 {
            Loss::ONE
        } else {
            Loss::ZERO
        }
    }

    /// Environment calls made while generating; never changes afterwards.
    pub fn env_calls(&self) -> u64 {
        self.env_calls
    }
}

pub fn percentile(sorted: &[u64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let idx = ((sorted.len() - 1) as f64 * q).round() as usize;
    sorted[idx] as f64
}

/// Time select + update of `policy` for `warmup + rounds` rounds and
/// summarize the last `rounds`.
pub fn bench_policy(
    policy: &mut dyn Policy,
    losses: &PrecomputedLosses,
    warmup: u64,
    rounds: u64,
) -> Result<(Vec<u64>, f64)> {
    let calls_before = losses.env_calls();
    let mut samples = Vec::with_capacity(rounds as usize);
    let mut attempts = 0u64;
    for i in 0..warmup + rounds {
        let t = policy.round();
        let start = Instant::now();
        let s = policy.select()?;
        let loss = losses.loss(t, s.arm);
        policy.update(&s, loss)?;
        let ns = start.elapsed().as_nanos() as u64;
        if i >= warmup {
            samples.push(ns);
            attempts += s.attempts as u64;
        }
    }
    debug_assert_eq!(losses.env_calls(), calls_before);
    samples.sort_unstable();
    Ok((samples, attempts as f64 / rounds.max(1) as f64))
}

pub fn bench_one(k: usize, backend: Backend, cfg: &BenchConfig) -> Result<BenchRow> {
    let horizon = cfg.warmup + cfg.rounds;
    let losses = PrecomputedLosses::generate(k, horizon, cfg.gap, cfg.seed)?;
    let calls_before = losses.env_calls();
    let mut engine = Exp3Engine::with_config(
        k,
        horizon,
        EngineConfig::new(backend),
        UniformSource::new(cfg.seed),
    )?;
    let (samples, mean_attempts) = bench_policy(&mut engine, &losses, cfg.warmup, cfg.rounds)?;
    let mean_ns = samples.iter().sum::<u64>() as f64 / samples.len().max(1) as f64;
    Ok(BenchRow {
        k,
        backend: backend.to_string(),
        rounds: cfg.rounds,
        median_ns: percentile(&samples, 0.5),
        p99_ns: percentile(&samples, 0.99),
        mean_ns,
        mean_attempts,
        rebuilds: engine.stats().rebuilds,
        env_calls_timed: losses.env_calls() - calls_before,
    })
}

/// Runs single-threaded, K-major.
pub fn run_bench(cfg: &BenchConfig) -> Result<Vec<BenchRow>> {
    if cfg.ks.is_empty() || cfg.backends.is_empty() {
        return invalid("bench needs at least one k and one backend");
    }
    if cfg.rounds == 0 {
        return invalid("bench needs at least one timed round");
    }
    let mut rows = Vec::new();
    for &k in &cfg.ks {
        for &b in &cfg.backends {
            log::info!("bench k={k} backend={b}");
            rows.push(bench_one(k, b, cfg)?);
        }
    }
    Ok(rows)
}

/// Columns: `config_hash,k,backend,rounds,median_ns,p99_ns,mean_ns,
/// mean_attempts,rebuilds,env_calls_timed`.
pub fn write_bench_csv(rows: &[BenchRow], config_hash: &str, out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "config_hash",
        "k",
        "backend",
        "rounds",
        "median_ns",
        "p99_ns",
        "mean_ns",
        "mean_attempts",
        "rebuilds",
        "env_calls_timed",
    ])?;
    for r in rows {
        w.write_record([
            config_hash.to_string(),
            r.k.to_string(),
            r.backend.clone(),
            r.rounds.to_string(),
            r.median_ns.to_string(),
            r.p99_ns.to_string(),
            r.mean_ns.to_string(),
            r.mean_attempts.to_string(),
            r.rebuilds.to_string(),
            r.env_calls_timed.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn percentiles() {
        let xs: Vec<u64> = (1..=101).collect();
        assert_eq!(percentile(&xs, 0.5), 51.0);
        assert_eq!(percentile(&xs, 0.99), 100.0);
    }

    #[test]
    fn timed_region_makes_no_env_calls() {
        let cfg = BenchConfig {
            ks: vec![64],
            backends: vec![Backend::AliasSnapshot],
            rounds: 2000,
            warmup: 100,
            ..BenchConfig::default()
        };
        let rows = run_bench(&cfg).unwrap();
        assert_eq!(rows[0].env_calls_timed, 0);
        assert!(rows[0].median_ns > 0.0);
    }

    #[test]
    fn table_rows_cycle_for_large_k() {
        let l = PrecomputedLosses::generate(1 << 18, 1000, 0.1, 1).unwrap();
        assert_eq!(l.rows, 4);
        assert_eq!(l.loss(1, 7), l.loss(5, 7));
        let mut env = StochasticEnv::with_gap(1 << 18, 0.1, 1).unwrap();
        for t in 1..=4 {
            let row = env.loss_vector(t).unwrap().to_vec();
            for arm in (0..1 << 18).step_by(997) {
                assert_eq!(l.loss(t, arm).value(), row[arm]);
            }
        }
    }
}
