//! The work behind each subcommand, separated from argument parsing.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rankbreak_core::PolicySpec;

use crate::batch::{default_threads, make_pool, BatchOutput, Job};
use crate::config::{Config, SweepConfig, SweepKind};
use crate::error::{AppError, AppResult};
use crate::output::{write_win_matrix, ResultWriter, SweepTag};
use crate::selfcheck::{self, ORACLE_MAX_K};

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub batches: Vec<(SweepTag, BatchOutput)>,
    pub files: Vec<PathBuf>,
}

/// Output directory: explicit flag, then config, then `RANKBREAK_OUT`, then
/// `results`.
pub fn resolve_out_dir(flag: Option<&Path>, cfg: &Config) -> PathBuf {
    if let Some(p) = flag {
        return p.to_path_buf();
    }
    if let Some(p) = &cfg.output_dir {
        return PathBuf::from(p);
    }
    std::env::var_os("RANKBREAK_OUT").map_or_else(|| PathBuf::from("results"), PathBuf::from)
}

fn stem_base(cfg: &Config) -> AppResult<String> {
    Ok(match &cfg.name {
        Some(n) => n.clone(),
        None => cfg.instance.build()?.name().to_string(),
    })
}

/// One batch per configured policy; CSVs go to `<name>__<policy>[_agg].csv`.
pub fn run_experiment(cfg: &Config, out_dir: &Path, dump_wins: bool) -> AppResult<RunOutcome> {
    cfg.validate()?;
    let inst = cfg.instance.build()?;
    let specs = cfg.policy_specs()?;
    let seeds = cfg.seed_list();
    let schedule = cfg.checkpoints.schedule();
    let pool = make_pool(cfg.threads.unwrap_or_else(default_threads))?;
    let fingerprint = cfg.fingerprint();
    let base = stem_base(cfg)?;
    let tag = SweepTag::default();

    let mut outcome = RunOutcome {
        batches: Vec::new(),
        files: Vec::new(),
    };
    for (spec, pc) in specs.iter().zip(&cfg.policies) {
        let job = Job {
            instance: &inst,
            shuffle: cfg.instance.shuffle,
            policy: spec,
            horizon: cfg.horizon,
            schedule: &schedule,
        };
        let out = job.run_batch(&seeds, &pool, fingerprint)?;
        let stem = format!("{base}__{}", pc.name);
        let mut writer = ResultWriter::create(out_dir, &stem)?;
        writer.write_traces(&out.traces, &tag)?;
        writer.write_aggregate(&out.result, &tag)?;
        let (a, b) = writer.paths();
        outcome.files.extend([a.to_path_buf(), b.to_path_buf()]);
        writer.finish()?;

        if dump_wins {
            let seed = out.result.seeds[0];
            let (_, wins) = job.run_seed_with_wins(seed)?;
            let path = out_dir.join(format!("{stem}_wins_seed{seed}.csv"));
            write_win_matrix(&path, &wins)?;
            outcome.files.push(path);
        }
        outcome.batches.push((tag.clone(), out));
    }
    Ok(outcome)
}

/// Every (value, policy) combination, all written to
/// `<name>__sweep_<kind>[_agg].csv`.
pub fn run_sweep(cfg: &Config, kind: SweepKind, values: Option<Vec<f64>>, out_dir: &Path) -> AppResult<RunOutcome> {
    let mut cfg = cfg.clone();
    let values = match values {
        Some(v) => v,
        None => cfg.sweep_values(kind)?,
    };
    cfg.sweep = Some(SweepConfig {
        kind,
        values: Some(values.clone()),
    });
    cfg.validate()?;
    let specs: Vec<PolicySpec> = cfg.policy_specs()?;
    let seeds = cfg.seed_list();
    let schedule = cfg.checkpoints.schedule();
    let pool = make_pool(cfg.threads.unwrap_or_else(default_threads))?;
    let fingerprint = cfg.fingerprint();
    let kind_name = match kind {
        SweepKind::Theta0 => "theta0",
        SweepKind::Topk => "topk",
    };
    let stem = format!("{}__sweep_{kind_name}", stem_base(&cfg)?);
    let mut writer = ResultWriter::create(out_dir, &stem)?;
    let (a, b) = writer.paths();
    let files = vec![a.to_path_buf(), b.to_path_buf()];

    let mut batches = Vec::new();
    for &value in &values {
        let inst = cfg.instance.build_swept(kind, value)?;
        let tag = SweepTag::new(kind.param_name(), value);
        for spec in &specs {
            let job = Job {
                instance: &inst,
                shuffle: cfg.instance.shuffle,
                policy: spec,
                horizon: cfg.horizon,
                schedule: &schedule,
            };
            let out = job.run_batch(&seeds, &pool, fingerprint)?;
            writer.write_traces(&out.traces, &tag)?;
            writer.write_aggregate(&out.result, &tag)?;
            batches.push((tag.clone(), out));
        }
    }
    writer.finish()?;
    Ok(RunOutcome { batches, files })
}

/// Final-round table, one line per batch.
pub fn format_summary(outcome: &RunOutcome) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<12} {:<10} {:<12} {:>6} {:>9} {:>14} {:>12} {:>14} {:>12}",
        "instance", "sweep", "policy", "seeds", "T", "reg_top", "sd", "reg_wtd", "sd"
    );
    for (tag, out) in &outcome.batches {
        let last = out.result.last();
        let sweep = if tag.param.is_empty() {
            "-".to_string()
        } else {
            format!("{}={}", tag.param, tag.value)
        };
        let _ = writeln!(
            s,
            "{:<12} {:<10} {:<12} {:>6} {:>9} {:>14.4} {:>12.4} {:>14.4} {:>12.4}",
            out.result.instance,
            sweep,
            out.result.policy,
            out.result.seeds.len(),
            last.t,
            last.mean_top,
            last.std_top,
            last.mean_wtd,
            last.std_wtd
        );
    }
    s
}

#[derive(Debug, Clone)]
pub struct OracleCheckOptions {
    pub instances: usize,
    pub k_max: usize,
    pub lambda_tol: f64,
    pub seed: u64,
    pub coverage_reps: usize,
    pub coverage_horizon: u64,
    pub sampler_draws: usize,
}

impl Default for OracleCheckOptions {
    fn default() -> Self {
        OracleCheckOptions {
            instances: 1000,
            k_max: ORACLE_MAX_K,
            lambda_tol: 1e-10,
            seed: 0,
            coverage_reps: 500,
            coverage_horizon: 2000,
            sampler_draws: 300_000,
        }
    }
}

/// Runs every self-test and returns the report text; any failure becomes
/// [`AppError::SelfTest`] carrying the same text.
pub fn oracle_check(opts: &OracleCheckOptions) -> AppResult<String> {
    if opts.k_max > ORACLE_MAX_K || opts.k_max == 0 {
        return Err(AppError::Config(format!(
            "oracle-check compares against exhaustive search and supports 1 <= K <= {ORACLE_MAX_K}, got K = {}; use a smaller instance",
            opts.k_max
        )));
    }
    if !(opts.lambda_tol.is_finite() && opts.lambda_tol > 0.0) {
        return Err(AppError::Config(format!("--lambda-tol {} must be positive", opts.lambda_tol)));
    }
    let mut report = String::new();
    let mut ok = true;

    let eq = selfcheck::optimizer_equivalence(opts.instances, opts.k_max, opts.lambda_tol, opts.seed);
    ok &= eq.passed();
    let _ = writeln!(
        report,
        "{}/{} optimizer matches (worst revenue gap {:e})",
        eq.matches, eq.total, eq.worst_gap
    );

    let sp = selfcheck::sampler_fidelity(20, opts.sampler_draws, opts.seed);
    let sampler_ok = sp.winner_deviation <= 0.01 && sp.ranking_deviation <= 0.01;
    ok &= sampler_ok;
    let _ = writeln!(
        report,
        "sampler: max winner deviation {:.5}, max ranking deviation {:.5} ({})",
        sp.winner_deviation,
        sp.ranking_deviation,
        if sampler_ok { "ok" } else { "FAIL" }
    );

    if opts.coverage_reps > 0 {
        let cov = selfcheck::ucb_coverage(opts.coverage_horizon, opts.coverage_reps, opts.seed);
        let cov_ok = cov.worst() <= 0.02;
        ok &= cov_ok;
        let _ = writeln!(
            report,
            "coverage over {} runs of {} rounds: pairwise violations {:.4}, score violations {:.4} ({})",
            cov.repetitions,
            cov.horizon,
            cov.pairwise,
            cov.scores,
            if cov_ok { "ok" } else { "FAIL" }
        );
    }

    if ok {
        Ok(report)
    } else {
        Err(AppError::SelfTest(report))
    }
}
