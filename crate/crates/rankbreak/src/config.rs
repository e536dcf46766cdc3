//! TOML experiment configuration.
//!
//! ```toml
//! name = "weak-no-choice"
//! horizon = 20000
//! seed_count = 20
//! checkpoints = "geometric"
//!
//! [instance]
//! theta0 = 0.01
//! m = 5
//! generator = { kind = "arith", k = 20 }
//!
//! [[policies]]
//! name = "adpivot"
//!
//! [[policies]]
//! name = "mnl-ucb"
//! ```

use std::collections::HashSet;
use std::path::Path;

use rankbreak_core::model::{make_arith, make_bad};
use rankbreak_core::policy::FeedbackMode;
use rankbreak_core::{build_policy, CheckpointSchedule, FeedbackKind, PlInstance, PolicyKind, PolicySpec};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{AppError, AppResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub horizon: u64,
    /// Explicit seed list; takes precedence over `seed_count`/`base_seed`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seeds: Option<Vec<u64>>,
    #[serde(default = "default_seed_count")]
    pub seed_count: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default)]
    pub checkpoints: CheckpointKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    pub instance: InstanceConfig,
    pub policies: Vec<PolicyConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
}

fn default_seed_count() -> usize {
    1
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckpointKind {
    #[default]
    Geometric,
    Full,
}

impl CheckpointKind {
    pub fn schedule(self) -> CheckpointSchedule {
        match self {
            CheckpointKind::Geometric => CheckpointSchedule::default(),
            CheckpointKind::Full => CheckpointSchedule::Full,
        }
    }
}

impl std::str::FromStr for CheckpointKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "geometric" => Ok(CheckpointKind::Geometric),
            "full" => Ok(CheckpointKind::Full),
            _ => Err(format!("unknown checkpoint schedule `{s}`; expected geometric or full")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub generator: Generator,
    #[serde(default = "default_theta0")]
    pub theta0: f64,
    /// Per-item revenues; all ones when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    pub m: usize,
    /// Ranking length for top-k feedback; winner feedback when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub top_k: Option<usize>,
    /// Relabel items with a per-seed random permutation. On by default so
    /// index tie-breaking cannot land on the optimum by construction.
    #[serde(default = "default_shuffle")]
    pub shuffle: bool,
}

fn default_shuffle() -> bool {
    true
}

fn default_theta0() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Generator {
    /// `θ_i = top − (i − 1) gap`, gap defaulting to `top / k`.
    Arith {
        k: usize,
        #[serde(default = "default_top")]
        top: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        gap: Option<f64>,
    },
    /// Constant `base` with a single item raised to `spike`.
    Bad {
        k: usize,
        base: f64,
        spike_index: usize,
        spike: f64,
    },
    Explicit {
        theta: Vec<f64>,
    },
}

fn default_top() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyConfig {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_cap: Option<f64>,
    /// `top` or `wtd`; each policy has its own default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mnl_constant: Option<f64>,
}

impl PolicyConfig {
    pub fn named(name: impl Into<String>) -> Self {
        PolicyConfig {
            name: name.into(),
            x: None,
            theta_cap: None,
            objective: None,
            mnl_constant: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepKind {
    Theta0,
    Topk,
}

impl SweepKind {
    pub fn default_values(self) -> Vec<f64> {
        match self {
            SweepKind::Theta0 => vec![1.0, 0.5, 0.1, 0.05, 0.01, 0.005, 0.001],
            SweepKind::Topk => vec![1.0, 2.0, 4.0, 8.0],
        }
    }

    /// Column label in sweep output.
    pub fn param_name(self) -> &'static str {
        match self {
            SweepKind::Theta0 => "theta0",
            SweepKind::Topk => "k",
        }
    }
}

impl std::str::FromStr for SweepKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "theta0" => Ok(SweepKind::Theta0),
            "topk" => Ok(SweepKind::Topk),
            _ => Err(format!("unknown sweep kind `{s}`; expected theta0 or topk")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub kind: SweepKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
}

/// Command-line overrides applied on top of a parsed file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed_count: Option<usize>,
    pub threads: Option<usize>,
    pub horizon: Option<u64>,
    pub x: Option<f64>,
    pub policies: Vec<String>,
    pub checkpoints: Option<CheckpointKind>,
}

fn cfg_err(field: &str, msg: impl std::fmt::Display) -> AppError {
    AppError::Config(format!("{field}: {msg}"))
}

impl Config {
    pub fn from_toml_str(text: &str) -> AppResult<Self> {
        toml::from_str(text).map_err(|e| AppError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> AppResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| AppError::Config(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| AppError::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config is always serializable")
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(n) = o.seed_count {
            self.seed_count = n;
            self.seeds = None;
        }
        if let Some(t) = o.threads {
            self.threads = Some(t);
        }
        if let Some(h) = o.horizon {
            self.horizon = h;
        }
        if !o.policies.is_empty() {
            self.policies = o.policies.iter().map(PolicyConfig::named).collect();
        }
        if let Some(x) = o.x {
            for p in &mut self.policies {
                p.x = Some(x);
            }
        }
        if let Some(c) = o.checkpoints {
            self.checkpoints = c;
        }
    }

    /// Seeds in the order given (explicit list) or `base_seed..base_seed+seed_count`.
    pub fn seed_list(&self) -> Vec<u64> {
        match &self.seeds {
            Some(s) => s.clone(),
            None => (0..self.seed_count as u64).map(|i| self.base_seed.wrapping_add(i)).collect(),
        }
    }

    /// Stable 64-bit digest of the settings that determine results. Thread
    /// count, output location and seed order do not contribute.
    pub fn fingerprint(&self) -> u64 {
        let mut canon = self.clone();
        canon.threads = None;
        canon.output_dir = None;
        let mut seeds = self.seed_list();
        seeds.sort_unstable();
        canon.seeds = Some(seeds);
        let digest = Sha256::digest(canon.to_toml_string().as_bytes());
        let mut head = [0u8; 8];
        head.copy_from_slice(&digest[..8]);
        u64::from_be_bytes(head)
    }

    pub fn policy_specs(&self) -> AppResult<Vec<PolicySpec>> {
        self.policies
            .iter()
            .enumerate()
            .map(|(i, p)| p.to_spec().map_err(|e| prefix(&format!("policies[{i}]"), e)))
            .collect()
    }

    /// Full validation, including policy/feedback compatibility, before any
    /// episode runs.
    pub fn validate(&self) -> AppResult<()> {
        if self.horizon == 0 {
            return Err(cfg_err("horizon", "must be at least 1"));
        }
        match &self.seeds {
            Some(s) if s.is_empty() => return Err(cfg_err("seeds", "must not be empty")),
            Some(s) => {
                let mut seen = HashSet::new();
                if let Some(d) = s.iter().find(|x| !seen.insert(**x)) {
                    return Err(cfg_err("seeds", format!("duplicate seed {d}")));
                }
            }
            None if self.seed_count == 0 => return Err(cfg_err("seed_count", "must be at least 1")),
            None => {}
        }
        if self.threads == Some(0) {
            return Err(cfg_err("threads", "must be at least 1"));
        }
        if self.policies.is_empty() {
            return Err(cfg_err("policies", "at least one policy is required"));
        }
        let specs = self.policy_specs()?;
        let instances = match &self.sweep {
            Some(sw) => self.sweep_values(sw.kind)?
                .into_iter()
                .map(|v| self.instance.build_swept(sw.kind, v))
                .collect::<AppResult<Vec<_>>>()?,
            None => vec![self.instance.build()?],
        };
        for inst in &instances {
            for (i, spec) in specs.iter().enumerate() {
                check_compatible(spec, inst, self.horizon).map_err(|e| prefix(&format!("policies[{i}]"), e))?;
            }
        }
        Ok(())
    }

    /// Values for a sweep of `kind`: from the `[sweep]` table when it names
    /// the same kind, otherwise the defaults.
    pub fn sweep_values(&self, kind: SweepKind) -> AppResult<Vec<f64>> {
        let values = match &self.sweep {
            Some(SweepConfig { kind: k, values: Some(v) }) if *k == kind => v.clone(),
            _ => kind.default_values(),
        };
        if values.is_empty() {
            return Err(cfg_err("sweep.values", "must not be empty"));
        }
        Ok(values)
    }
}

fn prefix(field: &str, e: AppError) -> AppError {
    match e {
        AppError::Config(msg) => AppError::Config(format!("{field}.{msg}")),
        other => other,
    }
}

/// Rejects a policy whose feedback mode differs from what the instance emits.
pub fn check_compatible(spec: &PolicySpec, inst: &PlInstance, horizon: u64) -> AppResult<()> {
    let policy = build_policy(spec, inst, horizon).map_err(|e| cfg_err("name", e))?;
    let emitted = FeedbackMode::of(inst.feedback());
    match policy.feedback_mode() {
        Some(needed) if needed != emitted => Err(cfg_err(
            "name",
            format!(
                "`{}` consumes {} feedback but the instance emits {} (set instance.top_k {})",
                spec.kind,
                mode_name(needed),
                mode_name(emitted),
                if needed == FeedbackMode::Ranking { "to use rankings" } else { "only for aoa-rb-k" },
            ),
        )),
        _ => Ok(()),
    }
}

fn mode_name(m: FeedbackMode) -> &'static str {
    match m {
        FeedbackMode::Winner => "winner",
        FeedbackMode::Ranking => "top-k ranking",
    }
}

impl PolicyConfig {
    pub fn to_spec(&self) -> AppResult<PolicySpec> {
        let kind: PolicyKind = self.name.parse().map_err(|e| cfg_err("name", e))?;
        let mut spec = PolicySpec::new(kind);
        if let Some(x) = self.x {
            if !(x.is_finite() && x > 0.0) {
                return Err(cfg_err("x", format!("{x} must be positive")));
            }
            spec.x = Some(x);
        }
        if let Some(cap) = self.theta_cap {
            if !(cap.is_finite() && cap > 0.0) {
                return Err(cfg_err("theta_cap", format!("{cap} must be positive")));
            }
            spec.theta_cap = cap;
        }
        if let Some(obj) = &self.objective {
            spec.objective = Some(obj.parse().map_err(|e| cfg_err("objective", e))?);
        }
        if let Some(c) = self.mnl_constant {
            if !(c.is_finite() && c > 0.0) {
                return Err(cfg_err("mnl_constant", format!("{c} must be positive")));
            }
            spec.mnl_constant = c;
        }
        Ok(spec)
    }
}

impl InstanceConfig {
    fn k(&self) -> usize {
        match &self.generator {
            Generator::Arith { k, .. } | Generator::Bad { k, .. } => *k,
            Generator::Explicit { theta } => theta.len(),
        }
    }

    pub fn build(&self) -> AppResult<PlInstance> {
        self.build_with(self.theta0, self.top_k)
    }

    /// The instance with one swept parameter replaced.
    pub fn build_swept(&self, kind: SweepKind, value: f64) -> AppResult<PlInstance> {
        match kind {
            SweepKind::Theta0 => self.build_with(value, self.top_k),
            SweepKind::Topk => {
                if !(value >= 1.0 && value.fract() == 0.0) {
                    return Err(cfg_err("sweep.values", format!("top-k length {value} must be a positive integer")));
                }
                self.build_with(self.theta0, Some(value as usize))
            }
        }
    }

    fn build_with(&self, theta0: f64, top_k: Option<usize>) -> AppResult<PlInstance> {
        let field = |f: &str| format!("instance.{f}");
        let k = self.k();
        if k == 0 {
            return Err(cfg_err(&field("generator"), "instance needs at least one item"));
        }
        let base = match &self.generator {
            Generator::Arith { k, top, gap } => make_arith(*k, *top, gap.unwrap_or(top / *k as f64)),
            Generator::Bad {
                k,
                base,
                spike_index,
                spike,
            } => make_bad(*k, *base, *spike_index, *spike),
            Generator::Explicit { theta } => {
                PlInstance::new(theta.clone(), 1.0, vec![1.0; k], 1, FeedbackKind::Winner).map(|i| i.with_name(format!("explicit{k}")))
            }
        }
        .map_err(|e| cfg_err(&field("generator"), e))?;

        let mut inst = base
            .with_theta0(theta0)
            .map_err(|e| cfg_err(&field("theta0"), e))?;
        if let Some(w) = &self.weights {
            inst = inst.with_weights(w.clone()).map_err(|e| cfg_err(&field("weights"), e))?;
        }
        inst = inst.with_m(self.m).map_err(|e| cfg_err(&field("m"), e))?;
        if let Some(len) = top_k {
            inst = inst
                .with_feedback(FeedbackKind::TopK(len))
                .map_err(|e| cfg_err(&field("top_k"), e))?;
        }
        Ok(match &self.name {
            Some(n) => inst.with_name(n.clone()),
            None => inst,
        })
    }
}
