use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::OptimizerConfig;
use crate::evaluation::DEFAULT_EVAL_CONTEXTS;
use crate::learners::{Algorithm, LearnerConfig};
use crate::model::{FixedPointConfig, Instance, InstanceSpec, ModelVariant};
use crate::seeding::{seed_split, SeedRole};

/// Environment variable that overrides `run.output_dir`.
pub const OUTPUT_DIR_ENV: &str = "PREFBANDIT_OUTPUT_DIR";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub run: RunSection,
    pub instance: InstanceSection,
    #[serde(default)]
    pub optimizer: OptimizerSection,
    #[serde(default)]
    pub fixed_point: FixedPointSection,
    #[serde(rename = "learner")]
    pub learners: Vec<LearnerSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub master_seed: u64,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    /// Rounds per online trajectory.
    #[serde(default = "default_horizon")]
    pub horizon: usize,
    /// Offline dataset sizes.
    #[serde(default)]
    pub m_grid: Vec<usize>,
    /// Regularization strengths for `sweep-eta`.
    #[serde(default)]
    pub eta_grid: Vec<f64>,
    #[serde(default = "default_eval_contexts")]
    pub eval_contexts: usize,
    /// Rounds between step-regret evaluations.
    #[serde(default = "default_one")]
    pub eval_every: usize,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSection {
    pub model: ModelVariant,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_n_actions")]
    pub n_actions: usize,
    #[serde(default = "default_eta")]
    pub eta: f64,
    /// Derived from `run.master_seed` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth_seed: Option<u64>,
    #[serde(default = "default_reward_scale")]
    pub reward_scale: f64,
    /// Size of a finite context list; zero means the uniform cube.
    #[serde(default)]
    pub finite_contexts: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearnerSection {
    pub algorithm: Algorithm,
    /// Name used in the CSV `learner` column; defaults to the algorithm tag.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default)]
    pub beta: f64,
    #[serde(default = "default_one")]
    pub tournament_size: usize,
    #[serde(default = "default_one")]
    pub refit_every: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerSection {
    pub max_iter: usize,
    pub grad_tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixedPointSection {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for OptimizerSection {
    fn default() -> Self {
        let d = OptimizerConfig::default();
        Self {
            max_iter: d.max_iter,
            grad_tol: d.grad_tol,
        }
    }
}

impl Default for FixedPointSection {
    fn default() -> Self {
        let d = FixedPointConfig::default();
        Self {
            tol: d.tol,
            max_iter: d.max_iter,
        }
    }
}

fn default_repetitions() -> usize {
    5
}
fn default_horizon() -> usize {
    2000
}
fn default_eval_contexts() -> usize {
    DEFAULT_EVAL_CONTEXTS
}
fn default_one() -> usize {
    1
}
fn default_output_dir() -> PathBuf {
    PathBuf::from("results")
}
fn default_k() -> usize {
    5
}
fn default_n_actions() -> usize {
    6
}
fn default_eta() -> f64 {
    1.0
}
fn default_reward_scale() -> f64 {
    1.0
}

/// Which subcommand a configuration is checked against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Online,
    Offline,
    SweepEta,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string().trim_end().to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Canonical text: every field explicit, fixed key order.
    pub fn to_canonical_toml(&self) -> String {
        toml::to_string(self).expect("configuration is always serializable")
    }

    pub fn truth_seed(&self) -> u64 {
        self.instance
            .truth_seed
            .unwrap_or_else(|| seed_split(self.run.master_seed, 0, SeedRole::Truth))
    }

    pub fn instance_spec(&self) -> InstanceSpec {
        InstanceSpec {
            k: self.instance.k,
            n_actions: self.instance.n_actions,
            variant: self.instance.model,
            eta: self.instance.eta,
            truth_seed: self.truth_seed(),
            reward_scale: self.instance.reward_scale,
            finite_contexts: self.instance.finite_contexts,
        }
    }

    pub fn build_instance(&self) -> Result<Instance> {
        Instance::generate(&self.instance_spec())
    }

    pub fn optimizer(&self) -> OptimizerConfig {
        OptimizerConfig {
            max_iter: self.optimizer.max_iter,
            grad_tol: self.optimizer.grad_tol,
            ..OptimizerConfig::default()
        }
    }

    pub fn fixed_point(&self) -> FixedPointConfig {
        FixedPointConfig {
            tol: self.fixed_point.tol,
            max_iter: self.fixed_point.max_iter,
            ..FixedPointConfig::default()
        }
    }

    pub fn learner_label(&self, index: usize) -> String {
        let l = &self.learners[index];
        l.label.clone().unwrap_or_else(|| l.algorithm.tag().to_string())
    }

    pub fn learner_config(&self, index: usize) -> LearnerConfig {
        let l = &self.learners[index];
        LearnerConfig {
            beta: l.beta,
            tournament_size: l.tournament_size,
            refit_every: l.refit_every,
            optimizer: self.optimizer(),
            fixed_point: self.fixed_point(),
            ..LearnerConfig::new(l.algorithm)
        }
    }

    /// `run.output_dir`, unless the environment override is set.
    pub fn output_dir(&self) -> PathBuf {
        match std::env::var_os(OUTPUT_DIR_ENV) {
            Some(dir) if !dir.is_empty() => PathBuf::from(dir),
            _ => self.run.output_dir.clone(),
        }
    }

    /// Semantic checks for `mode`; messages name the offending field.
    pub fn validate(&self, mode: Mode) -> Result<()> {
        let fail = |field: &str, msg: String| Err(Error::Config(format!("{field}: {msg}")));
        let run = &self.run;
        if run.repetitions == 0 {
            return fail("run.repetitions", "must be >= 1".into());
        }
        if run.eval_contexts == 0 {
            return fail("run.eval_contexts", "must be >= 1".into());
        }
        if run.eval_every == 0 {
            return fail("run.eval_every", "must be >= 1".into());
        }
        match mode {
            Mode::Online | Mode::SweepEta if run.horizon == 0 => {
                return fail("run.horizon", "must be >= 1".into());
            }
            Mode::Offline if run.m_grid.is_empty() => {
                return fail("run.m_grid", "must list at least one dataset size".into());
            }
            Mode::Offline if run.m_grid.contains(&0) => {
                return fail("run.m_grid", "dataset sizes must be >= 1".into());
            }
            Mode::SweepEta if run.eta_grid.is_empty() => {
                return fail("run.eta_grid", "must list at least one eta".into());
            }
            Mode::SweepEta => {
                if let Some(e) = run.eta_grid.iter().find(|e| !(e.is_finite() && **e > 0.0)) {
                    return fail("run.eta_grid", format!("eta must be finite and > 0, got {e}"));
                }
            }
            _ => {}
        }

        let inst = &self.instance;
        if inst.k == 0 {
            return fail("instance.k", "must be >= 1".into());
        }
        if inst.n_actions < 2 {
            return fail("instance.n_actions", "must be >= 2".into());
        }
        if !(inst.eta.is_finite() && inst.eta > 0.0) {
            return fail("instance.eta", format!("must be finite and > 0, got {}", inst.eta));
        }
        if !(inst.reward_scale.is_finite() && inst.reward_scale > 0.0) {
            return fail(
                "instance.reward_scale",
                format!("must be finite and > 0, got {}", inst.reward_scale),
            );
        }

        if !(self.optimizer.grad_tol >= 0.0) {
            return fail("optimizer.grad_tol", "must be >= 0".into());
        }
        if !(self.fixed_point.tol > 0.0) {
            return fail("fixed_point.tol", "must be > 0".into());
        }
        if self.fixed_point.max_iter == 0 {
            return fail("fixed_point.max_iter", "must be >= 1".into());
        }

        if self.learners.is_empty() {
            return fail("learner", "at least one [[learner]] is required".into());
        }
        let mut labels = HashSet::new();
        for (i, l) in self.learners.iter().enumerate() {
            let field = |name: &str| format!("learner[{i}].{name}");
            if l.algorithm.variant() != inst.model {
                return fail(
                    &field("algorithm"),
                    format!("{} needs a {} instance, but instance.model = {}", l.algorithm, l.algorithm.variant(), inst.model),
                );
            }
            let online = l.algorithm.is_online();
            if (mode == Mode::Offline) == online {
                let want = if mode == Mode::Offline { "an offline" } else { "an online" };
                return fail(&field("algorithm"), format!("{} is not {want} learner", l.algorithm));
            }
            if !(l.beta.is_finite() && l.beta >= 0.0) {
                return fail(&field("beta"), format!("must be finite and >= 0, got {}", l.beta));
            }
            if l.tournament_size == 0 {
                return fail(&field("tournament_size"), "must be >= 1".into());
            }
            if l.refit_every == 0 {
                return fail(&field("refit_every"), "must be >= 1".into());
            }
            if l.label.as_deref() == Some("") {
                return fail(&field("label"), "must not be empty".into());
            }
            if let Some(label) = &l.label {
                if label.contains([',', '"', '\n']) {
                    return fail(&field("label"), "must not contain commas, quotes or newlines".into());
                }
            }
            if !labels.insert(self.learner_label(i)) {
                return fail(
                    &field("label"),
                    format!("duplicate learner label '{}'; set distinct labels", self.learner_label(i)),
                );
            }
        }
        Ok(())
    }
}
