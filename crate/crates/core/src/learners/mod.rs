//! Online learners (greedy GP/BT, optimism-bonus BT, tournament GP) and the
//! offline greedy learner.

mod policy;

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::{
    reference_feature_mean, EstimatorState, GramState, OptimizerConfig, PreferenceDataset, PreferenceRecord,
    DEFAULT_RIDGE, REFERENCE_MEAN_SAMPLES,
};
use crate::model::{FixedPointConfig, Instance, ModelVariant};
use crate::seeding::{seed_split, SeedRole};

pub use policy::{greedy_bt_policy, greedy_gp_policy, optimism_bt_policy, tournament_select, LearnedPolicy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    GreedyGp,
    GreedyBt,
    OptimismBt,
    TournamentGp,
    OfflineGp,
    OfflineBt,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::GreedyGp,
        Algorithm::GreedyBt,
        Algorithm::OptimismBt,
        Algorithm::TournamentGp,
        Algorithm::OfflineGp,
        Algorithm::OfflineBt,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Algorithm::GreedyGp => "greedy-gp",
            Algorithm::GreedyBt => "greedy-bt",
            Algorithm::OptimismBt => "optimism-bt",
            Algorithm::TournamentGp => "tournament-gp",
            Algorithm::OfflineGp => "offline-gp",
            Algorithm::OfflineBt => "offline-bt",
        }
    }

    pub fn variant(self) -> ModelVariant {
        match self {
            Algorithm::GreedyGp | Algorithm::TournamentGp | Algorithm::OfflineGp => ModelVariant::Gp,
            Algorithm::GreedyBt | Algorithm::OptimismBt | Algorithm::OfflineBt => ModelVariant::Bt,
        }
    }

    pub fn is_online(self) -> bool {
        !matches!(self, Algorithm::OfflineGp | Algorithm::OfflineBt)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.tag() == s)
            .ok_or_else(|| {
                let known: Vec<&str> = Algorithm::ALL.iter().map(|a| a.tag()).collect();
                Error::InvalidArgument(format!("unknown algorithm '{s}' (expected one of {})", known.join(", ")))
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearnerConfig {
    pub algorithm: Algorithm,
    /// Bonus coefficient; optimism-bt only.
    pub beta: f64,
    /// Candidates per tournament; tournament-gp only.
    pub tournament_size: usize,
    /// Rounds between refits.
    pub refit_every: usize,
    /// Rounds between estimator snapshots; zero keeps none.
    pub snapshot_every: usize,
    pub optimizer: OptimizerConfig,
    pub fixed_point: FixedPointConfig,
}

impl LearnerConfig {
    pub fn new(algorithm: Algorithm) -> Self {
        Self {
            algorithm,
            beta: 0.0,
            tournament_size: 1,
            refit_every: 1,
            snapshot_every: 0,
            optimizer: OptimizerConfig::default(),
            fixed_point: FixedPointConfig::default(),
        }
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self
    }

    pub fn with_tournament_size(mut self, n: usize) -> Self {
        self.tournament_size = n;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta.is_finite() && self.beta >= 0.0) {
            return Err(Error::InvalidArgument(format!("beta must be finite and >= 0, got {}", self.beta)));
        }
        if self.tournament_size == 0 {
            return Err(Error::InvalidArgument("tournament_size must be >= 1".into()));
        }
        if self.refit_every == 0 {
            return Err(Error::InvalidArgument("refit_every must be >= 1".into()));
        }
        Ok(())
    }

    fn check_instance(&self, instance: &Instance) -> Result<()> {
        self.validate()?;
        if self.algorithm.variant() != instance.variant() {
            return Err(Error::VariantMismatch(format!(
                "{} needs a {} instance, got {}",
                self.algorithm,
                self.algorithm.variant(),
                instance.variant()
            )));
        }
        Ok(())
    }
}

/// One online round. `y == true` means `a1` was preferred.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundLog {
    pub t: usize,
    pub x: Vec<f64>,
    pub a1: usize,
    pub a2: usize,
    pub y: bool,
    /// Gap of the round's acting policy; `None` when not evaluated.
    pub step_regret: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct OnlineRun {
    pub rounds: Vec<RoundLog>,
    /// `(t, state after round t)` every `snapshot_every` rounds.
    pub snapshots: Vec<(usize, EstimatorState)>,
    pub final_state: EstimatorState,
}

/// Independent random streams of one run, all derived from the run seed so
/// that learners sharing a seed see the same contexts and uniforms.
struct Streams {
    contexts: ChaCha8Rng,
    first: ChaCha8Rng,
    second: ChaCha8Rng,
    labels: ChaCha8Rng,
    tournament: ChaCha8Rng,
    reference_mean: ChaCha8Rng,
}

impl Streams {
    fn new(seed: u64) -> Self {
        let stream = |index, role| ChaCha8Rng::seed_from_u64(seed_split(seed, index, role));
        Self {
            contexts: stream(0, SeedRole::ContextSampling),
            first: stream(0, SeedRole::Learner),
            second: stream(1, SeedRole::Learner),
            labels: stream(2, SeedRole::Learner),
            tournament: stream(3, SeedRole::Learner),
            reference_mean: stream(1, SeedRole::ContextSampling),
        }
    }
}

fn draw_label<R: Rng + ?Sized>(instance: &Instance, x: &[f64], a1: usize, a2: usize, rng: &mut R) -> Result<bool> {
    let p = instance.true_preference_prob(x, a1, a2)?;
    Ok(rng.gen::<f64>() < p)
}

/// Runs the online loop for `horizon` rounds without evaluating step regret.
pub fn run_online(instance: &Instance, cfg: &LearnerConfig, horizon: usize, seed: u64) -> Result<OnlineRun> {
    run_online_evaluated(instance, cfg, horizon, seed, 0, |_, _| Ok(0.0))
}

/// Runs the online loop for `horizon` rounds. Every `eval_every` rounds (never when
/// zero) `evaluate(t, policy)` scores the acting policy of round `t`.
pub fn run_online_evaluated<F>(
    instance: &Instance,
    cfg: &LearnerConfig,
    horizon: usize,
    seed: u64,
    eval_every: usize,
    mut evaluate: F,
) -> Result<OnlineRun>
where
    F: FnMut(usize, &LearnedPolicy) -> Result<f64>,
{
    cfg.check_instance(instance)?;
    if !cfg.algorithm.is_online() {
        return Err(Error::InvalidArgument(format!("{} is not an online learner", cfg.algorithm)));
    }
    if horizon == 0 {
        return Err(Error::InvalidArgument("horizon must be >= 1".into()));
    }
    let mut rng = Streams::new(seed);
    let gram = (cfg.algorithm == Algorithm::OptimismBt).then(|| {
        let mean = reference_feature_mean(instance, REFERENCE_MEAN_SAMPLES, &mut rng.reference_mean);
        GramState::new(DEFAULT_RIDGE, mean)
    });
    let mut state = EstimatorState::initial(instance, gram);
    let mut data = PreferenceDataset::new(instance.dim());
    let mut rounds = Vec::with_capacity(horizon);
    let mut snapshots = Vec::new();

    for t in 1..=horizon {
        let policy = match cfg.algorithm {
            Algorithm::OptimismBt => LearnedPolicy::optimistic(&state, cfg.beta)?,
            _ => LearnedPolicy::greedy(&state),
        };
        let x = instance.sample_context(&mut rng.contexts);
        let acting = policy.distribution(instance, &x, &cfg.fixed_point)?;
        let a1 = acting.sample(&mut rng.first);
        let a2 = match cfg.algorithm {
            Algorithm::TournamentGp => {
                let prefs = instance.preference_matrix(&state.params, &x)?;
                tournament_select(&prefs, &acting, cfg.tournament_size, &mut rng.tournament)
            }
            _ => instance.reference().sample(&mut rng.second),
        };
        let y = draw_label(instance, &x, a1, a2, &mut rng.labels)?;
        let step_regret = if eval_every > 0 && t % eval_every == 0 {
            Some(evaluate(t, &policy)?)
        } else {
            None
        };

        data.push(PreferenceRecord { x: x.clone(), a1, a2, y })?;
        if let Some(g) = state.gram.as_mut() {
            g.update(&x, &instance.actions()[a1]);
        }
        if t % cfg.refit_every == 0 {
            state.refit(&data, instance, &cfg.optimizer)?;
        }
        if cfg.snapshot_every > 0 && t % cfg.snapshot_every == 0 {
            snapshots.push((t, state.clone()));
        }
        rounds.push(RoundLog {
            t,
            x,
            a1,
            a2,
            y,
            step_regret,
        });
    }
    Ok(OnlineRun {
        rounds,
        snapshots,
        final_state: state,
    })
}

/// `m` records with `x ∼ d0`, `a1, a2 ∼ π0` and `y ∼ Ber(P*)`.
pub fn generate_offline_data(instance: &Instance, m: usize, seed: u64) -> Result<PreferenceDataset> {
    let mut rng = Streams::new(seed);
    let mut data = PreferenceDataset::new(instance.dim());
    for _ in 0..m {
        let x = instance.sample_context(&mut rng.contexts);
        let a1 = instance.reference().sample(&mut rng.first);
        let a2 = instance.reference().sample(&mut rng.second);
        let y = draw_label(instance, &x, a1, a2, &mut rng.labels)?;
        data.push(PreferenceRecord { x, a1, a2, y })?;
    }
    Ok(data)
}

#[derive(Debug, Clone)]
pub struct OfflineRun {
    pub policy: LearnedPolicy,
    pub state: EstimatorState,
    pub data: PreferenceDataset,
}

/// One MLE fit on `π0`-collected data, then the greedy policy.
pub fn run_offline(instance: &Instance, cfg: &LearnerConfig, m: usize, seed: u64) -> Result<OfflineRun> {
    run_offline_from(instance, cfg, m, seed, EstimatorState::initial(instance, None))
}

/// [`run_offline`] with an explicit warm start.
pub fn run_offline_from(
    instance: &Instance,
    cfg: &LearnerConfig,
    m: usize,
    seed: u64,
    mut state: EstimatorState,
) -> Result<OfflineRun> {
    cfg.check_instance(instance)?;
    if cfg.algorithm.is_online() {
        return Err(Error::InvalidArgument(format!("{} is not an offline learner", cfg.algorithm)));
    }
    if m == 0 {
        return Err(Error::InvalidArgument("offline dataset size must be >= 1".into()));
    }
    let data = generate_offline_data(instance, m, seed)?;
    state.refit(&data, instance, &cfg.optimizer)?;
    Ok(OfflineRun {
        policy: LearnedPolicy::greedy(&state),
        state,
        data,
    })
}
