use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use exp3_core::Backend;
use exp3_harness::accept::{run_accept_rate, write_accept_csv};
use exp3_harness::bench::{run_bench, write_bench_csv, BenchConfig};
use exp3_harness::regret::{run_regret, write_regret_csv};
use exp3_harness::table1::{render_table1, run_table1, Table1Config};
use exp3_harness::{export_env, ExperimentConfig, HarnessError, Result};

#[derive(Parser)]
#[command(
    name = "exp3-bench",
    version,
    about = "Run EXP3/EXP4 bandit experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Flat `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Single seed, replacing the config's seed list.
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    backend: Option<String>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    t: Option<u64>,
    /// Extra `key=value` overrides, applied after the other flags.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Pseudo-regret checkpoints per seed plus a summary row.
    Regret(Common),
    /// Median and p99 per-round latency per (K, backend).
    Bench {
        #[command(flatten)]
        common: Common,
        /// Comma-separated K values; overrides --k.
        #[arg(long)]
        ks: Option<String>,
        /// Comma-separated backends; overrides --backend.
        #[arg(long)]
        backends: Option<String>,
        #[arg(long, default_value_t = 100_000)]
        rounds: u64,
        #[arg(long, default_value_t = 10_000)]
        warmup: u64,
    },
    /// Rejection-sampling attempts per block for alias_snapshot.
    AcceptRate(Common),
    /// Measured summary table over all algorithms and backends.
    Table1 {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 4096)]
        bench_k: usize,
        #[arg(long, default_value_t = 100_000)]
        bench_rounds: u64,
    },
    /// Write the environment's loss table as header-free CSV.
    ExportEnv(Common),
}

impl Common {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(b) = &self.backend {
            cfg.set("backend", b)?;
        }
        if let Some(k) = self.k {
            cfg.k = k;
        }
        if let Some(t) = self.t {
            cfg.t = t;
        }
        if let Some(s) = self.seed {
            cfg.seeds = vec![s];
        }
        for kv in &self.set {
            let Some((key, value)) = kv.split_once('=') else {
                return Err(HarnessError::Invalid(format!(
                    "--set expects KEY=VALUE, got '{kv}'"
                )));
            };
            cfg.set(key.trim(), value.trim())?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn output(&self) -> Result<Box<dyn Write>> {
        Ok(match &self.out {
            Some(path) => Box::new(BufWriter::new(File::create(path)?)),
            None => Box::new(io::stdout().lock()),
        })
    }
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse()
                .map_err(|_| HarnessError::Invalid(format!("bad {what} '{x}'")))
        })
        .collect()
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Regret(common) => {
            let cfg = common.resolve()?;
            let report = run_regret(&cfg)?;
            write_regret_csv(&report, common.output()?)?;
        }
        Command::Bench {
            common,
            ks,
            backends,
            rounds,
            warmup,
        } => {
            let cfg = common.resolve()?;
            let mut bench = BenchConfig {
                rounds,
                warmup,
                seed: cfg.seeds[0],
                ..BenchConfig::default()
            };
            if let Some(ks) = ks {
                bench.ks = parse_list(&ks, "k")?;
            } else if let Some(k) = common.k {
                bench.ks = vec![k];
            }
            if let Some(list) = backends {
                bench.backends = parse_list::<Backend>(&list, "backend")?;
            } else if common.backend.is_some() {
                bench.backends = vec![cfg.backend];
            }
            let rows = run_bench(&bench)?;
            write_bench_csv(&rows, &cfg.hash(), common.output()?)?;
        }
        Command::AcceptRate(common) => {
            let cfg = common.resolve()?;
            let report = run_accept_rate(&cfg)?;
            if let Some(w) = &report.warning {
                log::warn!("{w}");
            }
            write_accept_csv(&report, common.output()?)?;
        }
        Command::Table1 {
            common,
            bench_k,
            bench_rounds,
        } => {
            let cfg = Table1Config {
                regret: common.resolve()?,
                bench_k,
                bench: BenchConfig {
                    rounds: bench_rounds,
                    ..BenchConfig::default()
                },
            };
            let rows = run_table1(&cfg)?;
            common
                .output()?
                .write_all(render_table1(&rows, &cfg).as_bytes())?;
        }
        Command::ExportEnv(common) => {
            let cfg = common.resolve()?;
            let Some(out) = &common.out else {
                return Err(HarnessError::Invalid("export-env needs --out".into()));
            };
            export_env(&cfg, cfg.seeds[0], out)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
