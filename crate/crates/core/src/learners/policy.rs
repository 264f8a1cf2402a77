use rand::Rng;

use crate::error::{Error, Result};
use crate::estimation::{EstimatorState, GramState};
use crate::model::{
    gibbs_policy, nash_fixed_point, ActionDistribution, FixedPointConfig, Instance, ModelParams,
    PreferenceMatrix, PreferenceTensor, RewardMatrix,
};

/// A context-indexed policy built from an estimate.
#[derive(Debug, Clone, PartialEq)]
pub enum LearnedPolicy {
    /// `π0`, used before the first fit.
    Reference,
    /// Symmetric Nash equilibrium of the estimated preference game.
    Nash(PreferenceTensor),
    /// Gibbs policy of the estimated reward.
    Gibbs(RewardMatrix),
    /// Gibbs policy of the estimated reward plus an elliptical bonus.
    Optimistic {
        reward: RewardMatrix,
        gram: GramState,
        beta: f64,
    },
}

impl LearnedPolicy {
    pub fn greedy(state: &EstimatorState) -> Self {
        if !state.is_fitted() {
            return LearnedPolicy::Reference;
        }
        match &state.params {
            ModelParams::Gp(m) => LearnedPolicy::Nash(m.clone()),
            ModelParams::Bt(w) => LearnedPolicy::Gibbs(w.clone()),
        }
    }

    pub fn optimistic(state: &EstimatorState, beta: f64) -> Result<Self> {
        if !state.is_fitted() {
            return Ok(LearnedPolicy::Reference);
        }
        let reward = state.params.as_reward()?.clone();
        let gram = state
            .gram
            .clone()
            .ok_or_else(|| Error::InvalidArgument("optimism requires a Gram state".into()))?;
        Ok(LearnedPolicy::Optimistic { reward, gram, beta })
    }

    /// The per-action payoff the Gibbs form exponentiates, where one exists
    /// in closed form (not for the Nash policy).
    pub fn gibbs_payoffs(&self, instance: &Instance, x: &[f64]) -> Option<Vec<f64>> {
        match self {
            LearnedPolicy::Reference => Some(vec![0.0; instance.n_actions()]),
            LearnedPolicy::Nash(_) => None,
            LearnedPolicy::Gibbs(w) => Some(instance.rewards(w, x)),
            LearnedPolicy::Optimistic { reward, gram, beta } => Some(
                instance
                    .actions()
                    .iter()
                    .map(|a| reward.reward(x, a) + gram.bonus(x, a, *beta))
                    .collect(),
            ),
        }
    }

    pub fn distribution(
        &self,
        instance: &Instance,
        x: &[f64],
        fixed_point: &FixedPointConfig,
    ) -> Result<ActionDistribution> {
        match self {
            LearnedPolicy::Reference => Ok(instance.reference().clone()),
            LearnedPolicy::Nash(m) => {
                let prefs = instance.preference_matrix(&ModelParams::Gp(m.clone()), x)?;
                Ok(nash_fixed_point(&prefs, instance.reference(), instance.eta(), fixed_point)?.policy)
            }
            _ => {
                let f = self.gibbs_payoffs(instance, x).expect("closed-form payoff");
                Ok(gibbs_policy(&f, instance.reference(), instance.eta()))
            }
        }
    }
}

/// NE policy of the estimated preference model, or `π0` before the first fit.
pub fn greedy_gp_policy(
    est: &EstimatorState,
    instance: &Instance,
    x: &[f64],
    fixed_point: &FixedPointConfig,
) -> Result<ActionDistribution> {
    est.params.as_tensor()?;
    LearnedPolicy::greedy(est).distribution(instance, x, fixed_point)
}

/// Gibbs policy of the estimated reward, or `π0` before the first fit.
pub fn greedy_bt_policy(est: &EstimatorState, instance: &Instance, x: &[f64]) -> Result<ActionDistribution> {
    est.params.as_reward()?;
    LearnedPolicy::greedy(est).distribution(instance, x, &FixedPointConfig::default())
}

/// Gibbs policy of `R̂(x, ·) + β ‖φ̃‖_{Σ⁻¹}`, or `π0` before the first fit.
pub fn optimism_bt_policy(
    est: &EstimatorState,
    instance: &Instance,
    x: &[f64],
    beta: f64,
) -> Result<ActionDistribution> {
    LearnedPolicy::optimistic(est, beta)?.distribution(instance, x, &FixedPointConfig::default())
}

/// Draws `n` candidates from `proposer` and returns the single-elimination
/// winner under `prefs`.
///
/// Candidates are bracketed in draw order: each round pairs neighbours
/// `(0,1), (2,3), ...` and an unpaired last candidate advances on a bye. The
/// earlier candidate `a` beats `b` when `P(a, b) >= 1/2`, so ties keep the
/// earlier draw.
pub fn tournament_select<R: Rng + ?Sized>(
    prefs: &PreferenceMatrix,
    proposer: &ActionDistribution,
    n: usize,
    rng: &mut R,
) -> usize {
    assert!(n >= 1, "tournament needs at least one candidate");
    let mut field: Vec<usize> = (0..n).map(|_| proposer.sample(rng)).collect();
    while field.len() > 1 {
        field = field
            .chunks(2)
            .map(|pair| match pair {
                [a, b] => {
                    if prefs.prob(*a, *b) >= 0.5 {
                        *a
                    } else {
                        *b
                    }
                }
                [a] => *a,
                _ => unreachable!(),
            })
            .collect();
    }
    field[0]
}
