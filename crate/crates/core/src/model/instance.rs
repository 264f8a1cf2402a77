use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::distribution::ActionDistribution;
use crate::model::game::PreferenceMatrix;
use crate::model::params::{
    logistic_preference, ratio_from_forms, ModelParams, ModelVariant, PreferenceTensor,
    RewardMatrix,
};
use crate::numeric::Fnv1a;

/// The context distribution `d0`.
#[derive(Debug, Clone, PartialEq)]
pub enum ContextDistribution {
    /// Uniform over `[0, 1]^k`.
    UniformCube,
    /// Uniform over an explicit list of contexts.
    Finite(Vec<Vec<f64>>),
}

/// A fully specified environment.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    k: usize,
    actions: Vec<Vec<f64>>,
    eta: f64,
    reference: ActionDistribution,
    truth: ModelParams,
    contexts: ContextDistribution,
    /// Upper bound of the box `[0, reward_scale]` holding every reward-matrix
    /// entry, for the truth and for fitted estimates alike.
    reward_scale: f64,
}

impl Instance {
    pub fn new(
        actions: Vec<Vec<f64>>,
        eta: f64,
        reference: ActionDistribution,
        truth: ModelParams,
        contexts: ContextDistribution,
        reward_scale: f64,
    ) -> Result<Self> {
        let k = truth.dim();
        if k == 0 {
            return Err(Error::InvalidInstance("dimension must be positive".into()));
        }
        if actions.len() < 2 {
            return Err(Error::InvalidInstance(format!(
                "need at least 2 actions, got {}",
                actions.len()
            )));
        }
        for a in &actions {
            if a.len() != k {
                return Err(Error::DimensionMismatch {
                    what: "action vector",
                    expected: k,
                    actual: a.len(),
                });
            }
            if a.iter().any(|v| !(0.0..=1.0).contains(v)) {
                return Err(Error::InvalidInstance(
                    "action coordinates must lie in [0, 1]".into(),
                ));
            }
        }
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::InvalidInstance(format!("eta must be positive, got {eta}")));
        }
        if reference.len() != actions.len() {
            return Err(Error::DimensionMismatch {
                what: "reference policy",
                expected: actions.len(),
                actual: reference.len(),
            });
        }
        if !reference.is_strictly_positive() {
            return Err(Error::InvalidInstance(
                "reference policy must put positive mass on every action".into(),
            ));
        }
        if !(reward_scale > 0.0 && reward_scale.is_finite()) {
            return Err(Error::InvalidInstance(format!(
                "reward scale must be positive, got {reward_scale}"
            )));
        }
        if let ModelParams::Bt(w) = &truth {
            if w.entries().iter().any(|v| !(0.0..=reward_scale).contains(v)) {
                return Err(Error::InvalidInstance(format!(
                    "reward matrix entries must lie in [0, {reward_scale}]"
                )));
            }
        }
        if let ContextDistribution::Finite(list) = &contexts {
            if list.is_empty() {
                return Err(Error::InvalidInstance("finite context list is empty".into()));
            }
            if let Some(x) = list.iter().find(|x| x.len() != k) {
                return Err(Error::DimensionMismatch {
                    what: "context vector",
                    expected: k,
                    actual: x.len(),
                });
            }
        }
        Ok(Self {
            k,
            actions,
            eta,
            reference,
            truth,
            contexts,
            reward_scale,
        })
    }

    /// Draws a random instance: truth parameters first, then the action set,
    /// then (for a finite context list) the contexts, all from `spec.truth_seed`.
    pub fn generate(spec: &InstanceSpec) -> Result<Self> {
        if spec.k == 0 {
            return Err(Error::InvalidInstance("dimension must be positive".into()));
        }
        let k = spec.k;
        let mut rng = ChaCha8Rng::seed_from_u64(spec.truth_seed);
        let truth = match spec.variant {
            ModelVariant::Gp => {
                let e = (0..k * k * k).map(|_| rng.gen::<f64>()).collect();
                ModelParams::Gp(PreferenceTensor::new(k, e)?)
            }
            ModelVariant::Bt => {
                let e = (0..k * k)
                    .map(|_| rng.gen::<f64>() * spec.reward_scale)
                    .collect();
                ModelParams::Bt(RewardMatrix::new(k, e)?)
            }
        };
        let actions = (0..spec.n_actions)
            .map(|_| (0..k).map(|_| rng.gen::<f64>()).collect())
            .collect();
        let contexts = match spec.finite_contexts {
            0 => ContextDistribution::UniformCube,
            n => ContextDistribution::Finite(
                (0..n)
                    .map(|_| (0..k).map(|_| rng.gen::<f64>()).collect())
                    .collect(),
            ),
        };
        Self::new(
            actions,
            spec.eta,
            ActionDistribution::uniform(spec.n_actions.max(1)),
            truth,
            contexts,
            spec.reward_scale,
        )
    }

    pub fn dim(&self) -> usize {
        self.k
    }

    pub fn actions(&self) -> &[Vec<f64>] {
        &self.actions
    }

    pub fn n_actions(&self) -> usize {
        self.actions.len()
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn reference(&self) -> &ActionDistribution {
        &self.reference
    }

    pub fn truth(&self) -> &ModelParams {
        &self.truth
    }

    pub fn variant(&self) -> ModelVariant {
        self.truth.variant()
    }

    pub fn contexts(&self) -> &ContextDistribution {
        &self.contexts
    }

    pub fn reward_scale(&self) -> f64 {
        self.reward_scale
    }

    /// Same environment under a different regularization strength.
    pub fn with_eta(&self, eta: f64) -> Result<Self> {
        Self::new(
            self.actions.clone(),
            eta,
            self.reference.clone(),
            self.truth.clone(),
            self.contexts.clone(),
            self.reward_scale,
        )
    }

    /// Same environment with the truth replaced.
    pub fn with_truth(&self, truth: ModelParams) -> Result<Self> {
        Self::new(
            self.actions.clone(),
            self.eta,
            self.reference.clone(),
            truth,
            self.contexts.clone(),
            self.reward_scale,
        )
    }

    pub fn sample_context<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        match &self.contexts {
            ContextDistribution::UniformCube => (0..self.k).map(|_| rng.gen::<f64>()).collect(),
            ContextDistribution::Finite(list) => list[rng.gen_range(0..list.len())].clone(),
        }
    }

    /// Pairwise preference probabilities of `model` over this action set at `x`.
    pub fn preference_matrix(&self, model: &ModelParams, x: &[f64]) -> Result<PreferenceMatrix> {
        if x.len() != self.k {
            return Err(Error::DimensionMismatch {
                what: "context vector",
                expected: self.k,
                actual: x.len(),
            });
        }
        let n = self.actions.len();
        match model {
            ModelParams::Gp(m) => {
                let b = m.contract(x);
                let mut forms = vec![0.0; n * n];
                for (i, ai) in self.actions.iter().enumerate() {
                    for (j, aj) in self.actions.iter().enumerate() {
                        forms[i * n + j] = super::params::bilinear_form(&b, self.k, ai, aj);
                    }
                }
                PreferenceMatrix::from_fn(n, |i, j| {
                    ratio_from_forms(forms[i * n + j], forms[j * n + i])
                        .ok_or(Error::DegeneratePair { a1: i, a2: j })
                })
            }
            ModelParams::Bt(w) => {
                let r = self.rewards(w, x);
                PreferenceMatrix::from_fn(n, |i, j| Ok(logistic_preference(r[i], r[j])))
            }
        }
    }

    pub fn true_preferences(&self, x: &[f64]) -> Result<PreferenceMatrix> {
        self.preference_matrix(&self.truth, x)
    }

    /// `R(x, a)` for every action.
    pub fn rewards(&self, w: &RewardMatrix, x: &[f64]) -> Vec<f64> {
        self.actions.iter().map(|a| w.reward(x, a)).collect()
    }

    /// `P*(x, a1, a2)` by action index.
    pub fn true_preference_prob(&self, x: &[f64], a1: usize, a2: usize) -> Result<f64> {
        self.truth
            .preference_prob(x, &self.actions[a1], &self.actions[a2])
            .map_err(|e| match e {
                Error::DegeneratePair { .. } => Error::DegeneratePair { a1, a2 },
                other => other,
            })
    }

    /// Stable fingerprint of every number defining the instance.
    pub fn fingerprint(&self) -> u64 {
        let mut h = Fnv1a::new();
        h.write_u64(self.k as u64);
        h.write(self.truth.variant().tag().as_bytes());
        for v in self.truth.entries() {
            h.write_f64(*v);
        }
        for a in &self.actions {
            for v in a {
                h.write_f64(*v);
            }
        }
        h.write_f64(self.eta);
        h.write_f64(self.reward_scale);
        for p in self.reference.probs() {
            h.write_f64(*p);
        }
        match &self.contexts {
            ContextDistribution::UniformCube => h.write(b"uniform"),
            ContextDistribution::Finite(list) => {
                h.write(b"finite");
                for x in list {
                    for v in x {
                        h.write_f64(*v);
                    }
                }
            }
        }
        h.finish()
    }
}

/// Recipe for a random instance.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceSpec {
    pub k: usize,
    pub n_actions: usize,
    pub variant: ModelVariant,
    pub eta: f64,
    pub truth_seed: u64,
    /// Reward-matrix entries are drawn from `U[0, reward_scale]`.
    pub reward_scale: f64,
    /// `0` selects the uniform cube; otherwise the size of a finite context list.
    pub finite_contexts: usize,
}

impl InstanceSpec {
    /// Five-dimensional contexts, six actions, `η = 1`.
    pub fn standard(variant: ModelVariant, truth_seed: u64) -> Self {
        Self {
            k: 5,
            n_actions: 6,
            variant,
            eta: 1.0,
            truth_seed,
            reward_scale: 1.0,
            finite_contexts: 0,
        }
    }
}
