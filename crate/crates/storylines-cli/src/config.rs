//! Run configuration: an optional JSON file plus command-line flags.
//!
//! Precedence is flags over file over built-in defaults, field by field.
//! Every command echoes the fully resolved values it used into
//! `config.json` in the output directory, so re-running the same command
//! with only `--config <out>/config.json` reproduces the run exactly.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::{Deserialize, Serialize};
use storylines::screening::Rule;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Scenario CSV: header row, one column per output of interest.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    /// Uncertain-input CSV, aligned row for row with the scenario CSV.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<PathBuf>,
    /// Column metadata JSON (units, kinds, categorical flags).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<PathBuf>,
    /// Directory the artifacts are written into.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// Master seed; every random choice in a run derives from it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_min: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_max: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub restarts: Option<usize>,
    /// Leaf budget for the storyline tree; defaults to k.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_leaves: Option<usize>,
    /// Range ratio above which an output counts as open.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lock_partial: Option<f64>,
    /// Range ratio at or below which an output counts as locked.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lock_locked: Option<f64>,
    /// Cross-validation folds for discovery.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub folds: Option<usize>,
    /// Smallest leaf budget in the discovery sweep.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget_min: Option<usize>,
    /// Largest leaf budget in the discovery sweep.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget_max: Option<usize>,
    /// Cross-validation coverage margin for tree selection.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub select_margin: Option<f64>,
    /// Screening rule: "threshold=<value>" or "top=<count>".
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rule: Option<String>,
    /// Worker threads; defaults to all cores.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jobs: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blobs: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub separation: Option<f64>,
    /// The two uncertain-input columns that drive synthetic labels.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drivers: Option<Vec<usize>>,
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<RunConfig> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("cannot read config '{}'", path.display()))?;
        serde_json::from_str(&text)
            .with_context(|| format!("config '{}' is not valid", path.display()))
    }

    /// Field-wise overlay: wherever `flags` carries a value it wins,
    /// otherwise the file value stays.
    pub fn overridden_by(self, flags: RunConfig) -> RunConfig {
        RunConfig {
            input: flags.input.or(self.input),
            theta: flags.theta.or(self.theta),
            metadata: flags.metadata.or(self.metadata),
            out: flags.out.or(self.out),
            seed: flags.seed.or(self.seed),
            k: flags.k.or(self.k),
            k_min: flags.k_min.or(self.k_min),
            k_max: flags.k_max.or(self.k_max),
            restarts: flags.restarts.or(self.restarts),
            max_leaves: flags.max_leaves.or(self.max_leaves),
            lock_partial: flags.lock_partial.or(self.lock_partial),
            lock_locked: flags.lock_locked.or(self.lock_locked),
            folds: flags.folds.or(self.folds),
            budget_min: flags.budget_min.or(self.budget_min),
            budget_max: flags.budget_max.or(self.budget_max),
            select_margin: flags.select_margin.or(self.select_margin),
            rule: flags.rule.or(self.rule),
            jobs: flags.jobs.or(self.jobs),
            blobs: flags.blobs.or(self.blobs),
            n: flags.n.or(self.n),
            m: flags.m.or(self.m),
            p: flags.p.or(self.p),
            noise: flags.noise.or(self.noise),
            separation: flags.separation.or(self.separation),
            drivers: flags.drivers.or(self.drivers),
        }
    }
}

pub fn parse_rule(text: &str) -> anyhow::Result<Rule> {
    let err = || anyhow::anyhow!("rule must be 'threshold=<value>' or 'top=<count>', got '{text}'");
    let (kind, value) = text.split_once('=').ok_or_else(err)?;
    match kind.trim() {
        "threshold" => Ok(Rule::Threshold(value.trim().parse().map_err(|_| err())?)),
        "top" => Ok(Rule::TopN(value.trim().parse().map_err(|_| err())?)),
        _ => Err(err()),
    }
}

pub fn rule_to_string(rule: &Rule) -> String {
    match rule {
        Rule::Threshold(v) => format!("threshold={v}"),
        Rule::TopN(n) => format!("top={n}"),
    }
}
