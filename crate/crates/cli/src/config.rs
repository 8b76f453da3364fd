//! Run configuration: an optional JSON file, overridden field by field by flags.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use pivotcost_core::analysis::bounds::ETA_PRIME_INFINITY;
use pivotcost_core::feedback::DEFAULT_SUFFICIENCY_THRESHOLD;
use pivotcost_core::combine::DEFAULT_MIN_ACT_COST_MS;
use pivotcost_core::{Backbone, OperatorKind};
use serde::Deserialize;

use crate::io::read_to_string;

pub const DEFAULT_TAU: f64 = 0.1;

#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// JSON config file; flags take precedence over its fields.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Plan documents (one object or an array).
    #[arg(long, global = true)]
    pub plans: Option<PathBuf>,
    /// Trained models (JSON).
    #[arg(long, global = true)]
    pub models: Option<PathBuf>,
    /// Feedback records (JSON lines).
    #[arg(long, global = true)]
    pub feedback: Option<PathBuf>,
    /// `leaves`, `all`, or a comma-separated list of operator kinds.
    #[arg(long, global = true)]
    pub backbone: Option<String>,
    /// Records needed before a kind gets a model.
    #[arg(long, global = true)]
    pub threshold: Option<usize>,
    /// Smallest actual cost (ms) a pivot may have.
    #[arg(long, global = true)]
    pub min_act_cost: Option<f64>,
    /// Minimum estimated improvement for a recommendation.
    #[arg(long, global = true)]
    pub tau: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Finite value standing in for an infinite eta'.
    #[arg(long, global = true)]
    pub eta_prime_inf: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerateSpec {
    pub n_queries: usize,
    pub noise_sd: f64,
    pub leaves_per_plan: usize,
    pub internals_per_plan: usize,
    pub card_range: (f64, f64),
}

impl Default for GenerateSpec {
    fn default() -> Self {
        GenerateSpec {
            n_queries: 100,
            noise_sd: 0.0,
            leaves_per_plan: 3,
            internals_per_plan: 2,
            card_range: (1e3, 1e6),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TuneSpec {
    pub n_queries: usize,
}

impl Default for TuneSpec {
    fn default() -> Self {
        TuneSpec { n_queries: 100 }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct FileConfig {
    plans: Option<PathBuf>,
    models: Option<PathBuf>,
    feedback: Option<PathBuf>,
    backbone: Option<String>,
    threshold: Option<usize>,
    min_act_cost: Option<f64>,
    tau: Option<f64>,
    seed: Option<u64>,
    out_dir: Option<PathBuf>,
    eta_prime_inf: Option<f64>,
    generate: GenerateSpec,
    tune: TuneSpec,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub plans: Option<PathBuf>,
    pub models: Option<PathBuf>,
    pub feedback: Option<PathBuf>,
    pub backbone: Backbone,
    pub threshold: usize,
    pub min_act_cost: f64,
    pub tau: f64,
    pub seed: Option<u64>,
    pub out_dir: PathBuf,
    pub eta_prime_inf: f64,
    pub generate: GenerateSpec,
    pub tune: TuneSpec,
}

impl RunConfig {
    pub fn resolve(flags: &Flags) -> Result<RunConfig> {
        let file = match &flags.config {
            Some(p) => {
                // Relative paths inside the file are relative to the file itself.
                let base = p.parent().map(Path::to_path_buf).unwrap_or_default();
                let mut f: FileConfig = serde_json::from_str(&read_to_string(p)?)
                    .with_context(|| format!("parsing {}", p.display()))?;
                for path in [&mut f.plans, &mut f.models, &mut f.feedback, &mut f.out_dir]
                    .into_iter()
                    .flatten()
                {
                    *path = base.join(&*path);
                }
                f
            }
            None => FileConfig::default(),
        };
        let backbone = match flags.backbone.as_ref().or(file.backbone.as_ref()) {
            Some(s) => parse_backbone(s)?,
            None => Backbone::leaves(),
        };
        let cfg = RunConfig {
            plans: flags.plans.clone().or(file.plans),
            models: flags.models.clone().or(file.models),
            feedback: flags.feedback.clone().or(file.feedback),
            backbone,
            threshold: flags.threshold.or(file.threshold).unwrap_or(DEFAULT_SUFFICIENCY_THRESHOLD),
            min_act_cost: flags.min_act_cost.or(file.min_act_cost).unwrap_or(DEFAULT_MIN_ACT_COST_MS),
            tau: flags.tau.or(file.tau).unwrap_or(DEFAULT_TAU),
            seed: flags.seed.or(file.seed),
            out_dir: flags.out_dir.clone().or(file.out_dir).unwrap_or_else(|| PathBuf::from(".")),
            eta_prime_inf: flags.eta_prime_inf.or(file.eta_prime_inf).unwrap_or(ETA_PRIME_INFINITY),
            generate: file.generate,
            tune: file.tune,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.tau) {
            bail!("tau must lie in [0, 1), got {}", self.tau);
        }
        if !(self.min_act_cost.is_finite() && self.min_act_cost >= 0.0) {
            bail!("min-act-cost must be finite and nonnegative, got {}", self.min_act_cost);
        }
        if !(self.eta_prime_inf.is_finite() && self.eta_prime_inf > 0.0) {
            bail!("eta-prime-inf must be finite and positive, got {}", self.eta_prime_inf);
        }
        if self.threshold == 0 {
            bail!("threshold must be at least 1");
        }
        Ok(())
    }

    pub fn require_seed(&self) -> Result<u64> {
        self.seed.context("this subcommand is stochastic and needs --seed")
    }

    /// The named input path, checked to exist.
    pub fn input(&self, name: &str, path: &Option<PathBuf>) -> Result<PathBuf> {
        let p = path.clone().with_context(|| format!("missing --{name}"))?;
        if !p.is_file() {
            bail!("--{name}: {} does not exist", p.display());
        }
        Ok(p)
    }

    pub fn optional_input(&self, name: &str, path: &Option<PathBuf>) -> Result<Option<PathBuf>> {
        path.as_ref().map(|_| self.input(name, path)).transpose()
    }
}

pub fn parse_backbone(s: &str) -> Result<Backbone> {
    match s.trim() {
        "leaves" => Ok(Backbone::leaves()),
        "all" => Ok(Backbone::all()),
        list => {
            let kinds = list
                .split(',')
                .map(str::trim)
                .filter(|k| !k.is_empty())
                .map(OperatorKind::from_name);
            Ok(Backbone::new(kinds)?)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("run.json");
        std::fs::write(&p, r#"{"tau": 0.3, "seed": 5, "plans": "p.json", "tune": {"n_queries": 7}}"#).unwrap();
        let flags = Flags {
            config: Some(p),
            seed: Some(9),
            ..Flags::default()
        };
        let cfg = RunConfig::resolve(&flags).unwrap();
        assert_eq!(cfg.tau, 0.3);
        assert_eq!(cfg.seed, Some(9));
        assert_eq!(cfg.plans, Some(dir.path().join("p.json")));
        assert_eq!(cfg.tune.n_queries, 7);
        assert_eq!(cfg.generate, GenerateSpec::default());
    }

    #[test]
    fn backbone_lists() {
        assert_eq!(parse_backbone("leaves").unwrap(), Backbone::leaves());
        let b = parse_backbone("Sort, HashJoin").unwrap();
        assert!(b.contains(&OperatorKind::Sort) && !b.contains(&OperatorKind::TableScan));
        assert!(parse_backbone(" , ").is_err());
    }

    #[test]
    fn bad_tau_is_rejected() {
        let flags = Flags {
            tau: Some(1.0),
            ..Flags::default()
        };
        assert!(RunConfig::resolve(&flags).is_err());
    }
}
