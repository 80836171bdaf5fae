//! Flat `key = value` experiment configs.
//!
//! ```text
//! # regret run
//! algorithm = delayed
//! backend = alias_snapshot
//! k = 10
//! t = 50000
//! env = stochastic
//! gap = 0.1
//! seeds = 1..20
//! ```
//!
//! Keys: `algorithm` (exp3-fixed, doubling, ftrl, delayed, exp4), `backend`,
//! `k`, `t`, `env` (stochastic, constant, adaptive, replay), `gap`, `means`
//! (comma list, overrides `gap`), `loss` (constant env), `replay` (CSV path),
//! `experts` (partition file for exp4), `seeds` (`a..b` inclusive or comma
//! list), `rebuild_period`, `work_budget`, `checkpoints`, `timing`.
//! Command-line flags are applied on top with [`ExperimentConfig::set`].

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use exp3_core::{Backend, LossTable, PartitionOracle};
use sha2::{Digest, Sha256};

use crate::error::{invalid, HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Exp3Fixed,
    Doubling,
    Ftrl,
    Delayed,
    Exp4,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Exp3Fixed => "exp3-fixed",
            Algorithm::Doubling => "doubling",
            Algorithm::Ftrl => "ftrl",
            Algorithm::Delayed => "delayed",
            Algorithm::Exp4 => "exp4",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "exp3-fixed" | "exp3" | "fixed" => Ok(Algorithm::Exp3Fixed),
            "doubling" => Ok(Algorithm::Doubling),
            "ftrl" => Ok(Algorithm::Ftrl),
            "delayed" => Ok(Algorithm::Delayed),
            "exp4" => Ok(Algorithm::Exp4),
            other => invalid(format!("unknown algorithm '{other}'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EnvSpec {
    /// Bernoulli arms; arm 0 has mean `0.5 - gap`, the rest 0.5.
    Gap(f64),
    /// Bernoulli arms with explicit means.
    Means(Vec<f64>),
    Constant(f64),
    Adaptive,
    Replay(PathBuf),
}

impl EnvSpec {
    fn canonical(&self) -> String {
        match self {
            EnvSpec::Gap(g) => format!("stochastic gap={g}"),
            EnvSpec::Means(m) => format!("stochastic means={}", join(m)),
            EnvSpec::Constant(l) => format!("constant loss={l}"),
            EnvSpec::Adaptive => "adaptive target_most_pulled".into(),
            EnvSpec::Replay(p) => format!("replay {}", p.display()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub algorithm: Algorithm,
    pub backend: Backend,
    pub k: usize,
    pub t: u64,
    pub env: EnvSpec,
    pub seeds: Vec<u64>,
    pub rebuild_period: Option<usize>,
    pub work_budget: usize,
    pub checkpoints: usize,
    pub experts: Option<PathBuf>,
    /// Record wall time per round in regret output. Off by default so that
    /// identical configs give byte-identical CSV.
    pub timing: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            algorithm: Algorithm::Exp3Fixed,
            backend: Backend::AliasSnapshot,
            k: 10,
            t: 50_000,
            env: EnvSpec::Gap(0.1),
            seeds: (1..=20).collect(),
            rebuild_period: None,
            work_budget: exp3_core::samplers::DEFAULT_WORK_BUDGET,
            checkpoints: 10,
            experts: None,
            timing: false,
        }
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        // `env` decides how `gap`/`loss`/`replay` are read, so apply it first.
        let mut pairs = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(HarnessError::Config {
                    line: i + 1,
                    message: format!("expected 'key = value', got '{line}'"),
                });
            };
            pairs.push((i + 1, key.trim().to_string(), value.trim().to_string()));
        }
        pairs.sort_by_key(|(_, k, _)| k != "env");
        for (line, key, value) in pairs {
            cfg.set(&key, &value).map_err(|e| HarnessError::Config {
                line,
                message: e.to_string(),
            })?;
        }
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }

    /// Apply one setting; used for both file lines and flag overrides.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "algorithm" => self.algorithm = value.parse()?,
            "backend" => self.backend = value.parse()?,
            "k" => self.k = num(key, value)?,
            "t" => self.t = num(key, value)?,
            "env" => {
                self.env = match value {
                    "stochastic" => EnvSpec::Gap(0.1),
                    "constant" => EnvSpec::Constant(1.0),
                    "adaptive" => EnvSpec::Adaptive,
                    "replay" => EnvSpec::Replay(PathBuf::new()),
                    other => return invalid(format!("unknown env '{other}'")),
                }
            }
            "gap" => self.env = EnvSpec::Gap(num(key, value)?),
            "means" => {
                let means = value
                    .split(',')
                    .map(|m| num(key, m.trim()))
                    .collect::<Result<Vec<f64>>>()?;
                self.env = EnvSpec::Means(means);
            }
            "loss" => self.env = EnvSpec::Constant(num(key, value)?),
            "replay" => self.env = EnvSpec::Replay(PathBuf::from(value)),
            "experts" => self.experts = Some(PathBuf::from(value)),
            "seeds" => self.seeds = parse_seeds(value)?,
            "seed" => self.seeds = vec![num(key, value)?],
            "rebuild_period" => self.rebuild_period = Some(num(key, value)?),
            "work_budget" => self.work_budget = num(key, value)?,
            "checkpoints" => self.checkpoints = num(key, value)?,
            "timing" => self.timing = num(key, value)?,
            other => return invalid(format!("unknown key '{other}'")),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return invalid("k must be at least 2");
        }
        if self.t == 0 {
            return invalid("t must be at least 1");
        }
        if self.seeds.is_empty() {
            return invalid("no seeds");
        }
        if self.checkpoints == 0 {
            return invalid("checkpoints must be at least 1");
        }
        if self.work_budget == 0 {
            return invalid("work_budget must be at least 1");
        }
        if self.rebuild_period == Some(0) {
            return invalid("rebuild_period must be at least 1");
        }
        match &self.env {
            EnvSpec::Gap(g) if !(0.0..=0.5).contains(g) => {
                return invalid(format!("gap {g} outside [0, 0.5]"))
            }
            EnvSpec::Means(m) if m.len() != self.k => {
                return invalid(format!("{} means for k = {}", m.len(), self.k))
            }
            EnvSpec::Constant(l) if !(0.0..=1.0).contains(l) => {
                return invalid(format!("loss {l} outside [0, 1]"))
            }
            EnvSpec::Replay(p) if p.as_os_str().is_empty() => {
                return invalid("env = replay needs 'replay = PATH'")
            }
            EnvSpec::Replay(p) if !p.is_file() => {
                return invalid(format!("replay file {} does not exist", p.display()))
            }
            _ => {}
        }
        if let Some(path) = &self.experts {
            if !path.is_file() {
                return invalid(format!("experts file {} does not exist", path.display()));
            }
            if self.algorithm != Algorithm::Exp4 {
                return invalid("'experts' only applies to algorithm = exp4");
            }
        }
        Ok(())
    }

    pub fn load_replay(&self) -> Result<Option<LossTable>> {
        let EnvSpec::Replay(path) = &self.env else {
            return Ok(None);
        };
        let table = LossTable::read_csv(path)?;
        if table.arms() != self.k {
            return invalid(format!(
                "replay table has {} arms, k = {}",
                table.arms(),
                self.k
            ));
        }
        if table.rounds() < self.t {
            return invalid(format!(
                "replay table has {} rounds, t = {}",
                table.rounds(),
                self.t
            ));
        }
        Ok(Some(table))
    }

    /// Expert partition for exp4: the file if given, else one expert per arm.
    pub fn load_oracle(&self) -> Result<PartitionOracle> {
        let oracle = match &self.experts {
            Some(path) => PartitionOracle::load(path, Some(self.k))?,
            None => PartitionOracle::new((0..self.k).collect(), self.k)?,
        };
        Ok(oracle)
    }

    /// One `key=value` line per setting in a fixed order.
    pub fn canonical(&self) -> String {
        let seeds: Vec<String> = self.seeds.iter().map(u64::to_string).collect();
        let mut out = String::new();
        let mut line = |k: &str, v: String| {
            out.push_str(k);
            out.push('=');
            out.push_str(&v);
            out.push('\n');
        };
        line("algorithm", self.algorithm.to_string());
        line("backend", self.backend.to_string());
        line("k", self.k.to_string());
        line("t", self.t.to_string());
        line("env", self.env.canonical());
        line("seeds", seeds.join(","));
        line(
            "rebuild_period",
            self.rebuild_period
                .map_or("default".into(), |p| p.to_string()),
        );
        line("work_budget", self.work_budget.to_string());
        line("checkpoints", self.checkpoints.to_string());
        line(
            "experts",
            self.experts
                .as_ref()
                .map_or("identity".into(), |p| p.display().to_string()),
        );
        line("timing", self.timing.to_string());
        out
    }

    /// First 16 hex digits of the SHA-256 of [`Self::canonical`].
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        hex::encode(digest)[..16].to_string()
    }
}

fn num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| HarnessError::Invalid(format!("bad value '{value}' for {key}")))
}

fn join(xs: &[f64]) -> String {
    xs.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
}

/// `a..b` (inclusive) or `a,b,c`.
pub fn parse_seeds(value: &str) -> Result<Vec<u64>> {
    if let Some((a, b)) = value.split_once("..") {
        let a: u64 = num("seeds", a.trim())?;
        let b: u64 = num("seeds", b.trim_start_matches('=').trim())?;
        if b < a {
            return invalid(format!("empty seed range {value}"));
        }
        return Ok((a..=b).collect());
    }
    value.split(',').map(|s| num("seeds", s.trim())).collect()
}
