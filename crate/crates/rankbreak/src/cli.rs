use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::commands::{self, OracleCheckOptions};
use crate::config::{CheckpointKind, Config, Overrides, SweepKind};
use crate::error::{AppError, AppResult};

#[derive(Debug, Parser)]
#[command(name = "rankbreak", version, about = "Regret experiments for Plackett-Luce assortment bandits")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run every configured policy on the configured instance.
    Run {
        #[command(flatten)]
        common: CommonArgs,
        /// Also write the rank-broken win counts of the first seed.
        #[arg(long)]
        dump_wins: bool,
    },
    /// Repeat the experiment over a range of no-choice scores or ranking lengths.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// `theta0` or `topk`; taken from the config's `[sweep]` table when omitted.
        #[arg(long, value_parser = parse_sweep_kind)]
        kind: Option<SweepKind>,
        /// Comma-separated values; built-in defaults otherwise.
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<f64>>,
    },
    /// Check the optimizer, sampler and confidence bounds against references.
    OracleCheck {
        /// Take the item count bound from this config's instance.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 1000)]
        instances: usize,
        /// Bisection tolerance handed to the optimizer under test.
        #[arg(long, default_value_t = 1e-10)]
        lambda_tol: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Repetitions of each coverage stream; 0 skips coverage.
        #[arg(long, default_value_t = 500)]
        coverage_reps: usize,
    },
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory (default: config, then $RANKBREAK_OUT, then ./results).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed_count: Option<usize>,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub horizon: Option<u64>,
    /// Confidence parameter for every policy.
    #[arg(long)]
    pub x: Option<f64>,
    /// Replace the configured policies; repeatable.
    #[arg(long = "policy")]
    pub policies: Vec<String>,
    #[arg(long, value_parser = parse_checkpoint)]
    pub checkpoint: Option<CheckpointKind>,
}

fn parse_sweep_kind(s: &str) -> Result<SweepKind, String> {
    s.parse()
}

fn parse_checkpoint(s: &str) -> Result<CheckpointKind, String> {
    s.parse()
}

impl CommonArgs {
    fn load(&self) -> AppResult<Config> {
        let mut cfg = Config::load(&self.config)?;
        cfg.apply(&Overrides {
            seed_count: self.seed_count,
            threads: self.threads,
            horizon: self.horizon,
            x: self.x,
            policies: self.policies.clone(),
            checkpoints: self.checkpoint,
        });
        Ok(cfg)
    }
}

/// Executes a parsed command, printing results to stdout.
pub fn execute(cli: Cli) -> AppResult<()> {
    match cli.command {
        Command::Run { common, dump_wins } => {
            let cfg = common.load()?;
            let out = commands::resolve_out_dir(common.out.as_deref(), &cfg);
            let outcome = commands::run_experiment(&cfg, &out, dump_wins)?;
            print!("{}", commands::format_summary(&outcome));
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
        }
        Command::Sweep { common, kind, values } => {
            let cfg = common.load()?;
            let kind = kind
                .or(cfg.sweep.as_ref().map(|s| s.kind))
                .ok_or_else(|| AppError::Config("sweep needs --kind or a [sweep] table in the config".into()))?;
            let out = commands::resolve_out_dir(common.out.as_deref(), &cfg);
            let outcome = commands::run_sweep(&cfg, kind, values, &out)?;
            print!("{}", commands::format_summary(&outcome));
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
        }
        Command::OracleCheck {
            config,
            instances,
            lambda_tol,
            seed,
            coverage_reps,
        } => {
            let mut opts = OracleCheckOptions {
                instances,
                lambda_tol,
                seed,
                coverage_reps,
                ..Default::default()
            };
            if let Some(path) = config {
                let cfg = Config::load(&path)?;
                opts.k_max = cfg.instance.build()?.k();
            }
            if instances == 0 {
                return Err(AppError::Config("--instances must be at least 1".into()));
            }
            let report = commands::oracle_check(&opts)?;
            print!("{report}");
        }
    }
    Ok(())
}
