use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::evaluation::{policy_gap, step_regret, EvalContextSet, RegretTrace};
use crate::harness::config::{ExperimentConfig, Mode};
use crate::harness::stats::{loglog_slope, mean, sample_std};
use crate::learners::{run_offline, run_online_evaluated, RoundLog};
use crate::model::Instance;
use crate::numeric::Fnv1a;
use crate::seeding::{seed_split, SeedRole};

/// Seed of repetition `r`'s learner streams; shared by every learner so that
/// contexts and sampling uniforms line up across a comparison.
pub fn run_seed(master: u64, repetition: usize) -> u64 {
    seed_split(master, repetition as u64, SeedRole::Learner)
}

/// Seed of repetition `r`'s evaluation contexts.
pub fn eval_seed(master: u64, repetition: usize) -> u64 {
    seed_split(master, repetition as u64, SeedRole::EvalSet)
}

pub fn config_hash(cfg: &ExperimentConfig) -> u64 {
    let mut h = Fnv1a::new();
    h.write(cfg.to_canonical_toml().as_bytes());
    h.finish()
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub learner: String,
    pub repetition: usize,
    pub seed: u64,
    pub rounds: Vec<RoundLog>,
    pub trace: RegretTrace,
}

#[derive(Debug, Clone)]
pub struct OnlineResults {
    /// Sorted by `(learner, repetition)`.
    pub runs: Vec<RunOutput>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub learner: String,
    pub t: usize,
    pub mean_step: f64,
    pub std_step: f64,
    pub mean_cum: f64,
    pub std_cum: f64,
    pub n_seeds: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OfflineRow {
    pub learner: String,
    pub repetition: usize,
    pub m: usize,
    pub gap: f64,
}

#[derive(Debug, Clone)]
pub struct OfflineResults {
    /// Sorted by `(learner, repetition, m)`.
    pub rows: Vec<OfflineRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OfflineSummaryRow {
    pub learner: String,
    pub m: usize,
    pub mean_gap: f64,
    pub std_gap: f64,
    pub n_seeds: usize,
    /// Slope of `ln mean_gap` against `ln m` over the whole grid, repeated on
    /// each row of the learner.
    pub loglog_slope: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct SweepResults {
    /// One group per η, in grid order.
    pub groups: Vec<(f64, OnlineResults)>,
}

fn wrap(learner: &str, repetition: usize) -> impl Fn(Error) -> Error + '_ {
    move |e| Error::Run {
        learner: learner.to_string(),
        repetition,
        source: Box::new(e),
    }
}

fn eval_sets(cfg: &ExperimentConfig, instance: &Instance, contexts: &[Vec<Vec<f64>>]) -> Result<Vec<EvalContextSet>> {
    let fp = cfg.fixed_point();
    contexts
        .par_iter()
        .map(|c| EvalContextSet::from_contexts(instance, c.clone(), &fp))
        .collect()
}

fn eval_contexts(cfg: &ExperimentConfig, instance: &Instance) -> Vec<Vec<Vec<f64>>> {
    (0..cfg.run.repetitions)
        .map(|r| EvalContextSet::draw_contexts(instance, cfg.run.eval_contexts, eval_seed(cfg.run.master_seed, r)))
        .collect()
}

fn online_grid(cfg: &ExperimentConfig, instance: &Instance, sets: &[EvalContextSet]) -> Result<OnlineResults> {
    let hash = config_hash(cfg);
    let jobs: Vec<(usize, usize)> = (0..cfg.learners.len())
        .flat_map(|l| (0..cfg.run.repetitions).map(move |r| (l, r)))
        .collect();
    let fp = cfg.fixed_point();
    let mut runs = jobs
        .par_iter()
        .map(|&(l, r)| -> Result<RunOutput> {
            let label = cfg.learner_label(l);
            let seed = run_seed(cfg.run.master_seed, r);
            let ctxs = &sets[r];
            let run = run_online_evaluated(
                instance,
                &cfg.learner_config(l),
                cfg.run.horizon,
                seed,
                cfg.run.eval_every,
                |t, policy| step_regret(instance, ctxs, policy, &fp, t),
            )
            .map_err(wrap(&label, r))?;
            let trace = RegretTrace::from_rounds(seed, hash, &run.rounds);
            Ok(RunOutput {
                learner: label,
                repetition: r,
                seed,
                rounds: run.rounds,
                trace,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    runs.sort_by(|a, b| (&a.learner, a.repetition).cmp(&(&b.learner, b.repetition)));
    Ok(OnlineResults { runs })
}

/// `repetitions × learners` online trajectories with per-round step regret.
pub fn run_online_experiment(cfg: &ExperimentConfig) -> Result<OnlineResults> {
    cfg.validate(Mode::Online)?;
    let instance = cfg.build_instance()?;
    let contexts = eval_contexts(cfg, &instance);
    let sets = eval_sets(cfg, &instance, &contexts)?;
    online_grid(cfg, &instance, &sets)
}

/// The online experiment repeated per η. The truth, the evaluation contexts
/// and the run seeds are the same at every η.
pub fn run_eta_sweep(cfg: &ExperimentConfig) -> Result<SweepResults> {
    cfg.validate(Mode::SweepEta)?;
    let base = cfg.build_instance()?;
    let contexts = eval_contexts(cfg, &base);
    let mut groups = Vec::with_capacity(cfg.run.eta_grid.len());
    for &eta in &cfg.run.eta_grid {
        let instance = base.with_eta(eta)?;
        let sets = eval_sets(cfg, &instance, &contexts)?;
        groups.push((eta, online_grid(cfg, &instance, &sets)?));
    }
    Ok(SweepResults { groups })
}

/// For every learner, repetition and `m`: one offline fit and its gap. The
/// datasets of one repetition are prefixes of a single stream.
pub fn run_offline_experiment(cfg: &ExperimentConfig) -> Result<OfflineResults> {
    cfg.validate(Mode::Offline)?;
    let instance = cfg.build_instance()?;
    let contexts = eval_contexts(cfg, &instance);
    let sets = eval_sets(cfg, &instance, &contexts)?;
    let fp = cfg.fixed_point();
    let jobs: Vec<(usize, usize, usize)> = (0..cfg.learners.len())
        .flat_map(|l| {
            (0..cfg.run.repetitions).flat_map(move |r| cfg.run.m_grid.iter().map(move |m| (l, r, *m)))
        })
        .collect();
    let mut rows = jobs
        .par_iter()
        .map(|&(l, r, m)| -> Result<OfflineRow> {
            let label = cfg.learner_label(l);
            let out = run_offline(&instance, &cfg.learner_config(l), m, run_seed(cfg.run.master_seed, r))
                .map_err(wrap(&label, r))?;
            let gap = policy_gap(&instance, &sets[r], &out.policy, &fp).map_err(wrap(&label, r))?;
            Ok(OfflineRow {
                learner: label,
                repetition: r,
                m,
                gap,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| (&a.learner, a.repetition, a.m).cmp(&(&b.learner, b.repetition, b.m)));
    Ok(OfflineResults { rows })
}

/// Per `(learner, t)` mean and sample std of step and cumulative regret
/// across repetitions.
pub fn summarize_online(results: &OnlineResults) -> Vec<SummaryRow> {
    let mut groups: BTreeMap<(&str, usize), (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for run in &results.runs {
        for ((t, step), cum) in run.trace.steps.iter().zip(&run.trace.cumulative) {
            let g = groups.entry((run.learner.as_str(), *t)).or_default();
            g.0.push(*step);
            g.1.push(*cum);
        }
    }
    groups
        .into_iter()
        .map(|((learner, t), (steps, cums))| SummaryRow {
            learner: learner.to_string(),
            t,
            mean_step: mean(&steps),
            std_step: sample_std(&steps),
            mean_cum: mean(&cums),
            std_cum: sample_std(&cums),
            n_seeds: steps.len(),
        })
        .collect()
}

pub fn summarize_offline(results: &OfflineResults) -> Vec<OfflineSummaryRow> {
    let mut groups: BTreeMap<&str, BTreeMap<usize, Vec<f64>>> = BTreeMap::new();
    for row in &results.rows {
        groups
            .entry(row.learner.as_str())
            .or_default()
            .entry(row.m)
            .or_default()
            .push(row.gap);
    }
    let mut out = Vec::new();
    for (learner, by_m) in groups {
        let ms: Vec<f64> = by_m.keys().map(|m| *m as f64).collect();
        let means: Vec<f64> = by_m.values().map(|g| mean(g)).collect();
        let slope = loglog_slope(&ms, &means);
        for ((m, gaps), mean_gap) in by_m.iter().zip(&means) {
            out.push(OfflineSummaryRow {
                learner: learner.to_string(),
                m: *m,
                mean_gap: *mean_gap,
                std_gap: sample_std(gaps),
                n_seeds: gaps.len(),
                loglog_slope: slope,
            });
        }
    }
    out
}
