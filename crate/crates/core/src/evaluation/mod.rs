//! Exact values, suboptimality gaps, regret traces and coverage.

mod coverage;
mod trace;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::learners::LearnedPolicy;
use crate::model::{
    best_response_min, gibbs_policy, log_partition, nash_fixed_point, ActionDistribution, ContextDistribution,
    FixedPointConfig, Instance, ModelVariant, PreferenceMatrix,
};

pub use coverage::coverage_coefficient;
pub use trace::RegretTrace;

/// Contexts per Monte Carlo evaluation set.
pub const DEFAULT_EVAL_CONTEXTS: usize = 200;
/// Step regret below `-GP_GAP_TOLERANCE` aborts a GP run.
pub const GP_GAP_TOLERANCE: f64 = 1e-9;
/// Step regret below `-BT_GAP_TOLERANCE` aborts a BT run.
pub const BT_GAP_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone)]
enum ContextTruth {
    Gp { prefs: PreferenceMatrix, nash: ActionDistribution },
    Bt { rewards: Vec<f64>, optimum: ActionDistribution, log_partition: f64 },
}

/// A fixed context sample standing in for `E_{x∼d0}`, with the ground-truth
/// optimum cached per context. All values computed over the set use exact
/// sums over actions.
#[derive(Debug, Clone)]
pub struct EvalContextSet {
    fingerprint: u64,
    contexts: Vec<Vec<f64>>,
    truth: Vec<ContextTruth>,
    optimal_value: f64,
}

impl EvalContextSet {
    /// `size` contexts drawn from `d0` with `seed`, or the whole list for a
    /// finite context distribution.
    pub fn for_instance(instance: &Instance, size: usize, seed: u64, fixed_point: &FixedPointConfig) -> Result<Self> {
        Self::from_contexts(instance, Self::draw_contexts(instance, size, seed), fixed_point)
    }

    /// The contexts [`EvalContextSet::for_instance`] would use.
    pub fn draw_contexts(instance: &Instance, size: usize, seed: u64) -> Vec<Vec<f64>> {
        match instance.contexts() {
            ContextDistribution::Finite(list) => list.clone(),
            ContextDistribution::UniformCube => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                (0..size).map(|_| instance.sample_context(&mut rng)).collect()
            }
        }
    }

    pub fn from_contexts(instance: &Instance, contexts: Vec<Vec<f64>>, fixed_point: &FixedPointConfig) -> Result<Self> {
        if contexts.is_empty() {
            return Err(Error::InvalidArgument("evaluation set needs at least one context".into()));
        }
        for x in &contexts {
            if x.len() != instance.dim() {
                return Err(Error::DimensionMismatch {
                    what: "evaluation context",
                    expected: instance.dim(),
                    actual: x.len(),
                });
            }
        }
        let reference = instance.reference();
        let eta = instance.eta();
        let truth = contexts
            .par_iter()
            .map(|x| -> Result<ContextTruth> {
                Ok(match instance.variant() {
                    ModelVariant::Gp => {
                        let prefs = instance.true_preferences(x)?;
                        let nash = nash_fixed_point(&prefs, reference, eta, fixed_point)?.policy;
                        ContextTruth::Gp { prefs, nash }
                    }
                    ModelVariant::Bt => {
                        let rewards = instance.rewards(instance.truth().as_reward()?, x);
                        let optimum = gibbs_policy(&rewards, reference, eta);
                        let log_partition = log_partition(&rewards, reference, eta);
                        ContextTruth::Bt {
                            rewards,
                            optimum,
                            log_partition,
                        }
                    }
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let optimal_value = match instance.variant() {
            // Symmetric zero-sum game: the minimax value is exactly 1/2.
            ModelVariant::Gp => 0.5,
            ModelVariant::Bt => {
                truth
                    .iter()
                    .map(|t| match t {
                        ContextTruth::Bt { log_partition, .. } => *log_partition,
                        ContextTruth::Gp { .. } => unreachable!(),
                    })
                    .sum::<f64>()
                    / truth.len() as f64
            }
        };
        Ok(Self {
            fingerprint: instance.fingerprint(),
            contexts,
            truth,
            optimal_value,
        })
    }

    pub fn contexts(&self) -> &[Vec<f64>] {
        &self.contexts
    }

    pub fn len(&self) -> usize {
        self.contexts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.contexts.is_empty()
    }

    /// `J*`: 1/2 for GP, `E_x[η⁻¹ log Σ_a π0(a) e^{η R*(x,a)}]` for BT.
    pub fn optimal_value(&self) -> f64 {
        self.optimal_value
    }

    /// Fails unless the set was built for exactly this instance.
    pub fn check(&self, instance: &Instance) -> Result<()> {
        if instance.fingerprint() != self.fingerprint {
            return Err(Error::StaleEvalSet);
        }
        Ok(())
    }

    /// Ground-truth optimal policy at every context (NE for GP, Gibbs for BT).
    pub fn optimal_policies(&self) -> Vec<ActionDistribution> {
        self.truth
            .iter()
            .map(|t| match t {
                ContextTruth::Gp { nash, .. } => nash.clone(),
                ContextTruth::Bt { optimum, .. } => optimum.clone(),
            })
            .collect()
    }

    /// `P*(x, ·, ·)` at every context; GP instances only.
    pub fn true_preferences(&self) -> Result<Vec<PreferenceMatrix>> {
        self.truth
            .iter()
            .map(|t| match t {
                ContextTruth::Gp { prefs, .. } => Ok(prefs.clone()),
                ContextTruth::Bt { .. } => Err(Error::VariantMismatch("preference matrices of a BT set".into())),
            })
            .collect()
    }

    /// `R*(x, ·)` at every context; BT instances only.
    pub fn true_rewards(&self) -> Result<Vec<Vec<f64>>> {
        self.truth
            .iter()
            .map(|t| match t {
                ContextTruth::Bt { rewards, .. } => Ok(rewards.clone()),
                ContextTruth::Gp { .. } => Err(Error::VariantMismatch("rewards of a GP set".into())),
            })
            .collect()
    }

    /// Evaluates a context-indexed policy on every context of the set.
    pub fn policies(
        &self,
        instance: &Instance,
        policy: &LearnedPolicy,
        fixed_point: &FixedPointConfig,
    ) -> Result<Vec<ActionDistribution>> {
        self.contexts
            .par_iter()
            .map(|x| policy.distribution(instance, x, fixed_point))
            .collect()
    }

    fn check_len(&self, what: &'static str, n: usize) -> Result<()> {
        if n != self.len() {
            return Err(Error::DimensionMismatch {
                what,
                expected: self.len(),
                actual: n,
            });
        }
        Ok(())
    }
}

fn check_same_len(what: &'static str, expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::DimensionMismatch { what, expected, actual });
    }
    Ok(())
}

/// `E_x[P(x, π1, π2) − η⁻¹ KL(π1‖π0) + η⁻¹ KL(π2‖π0)]` over the given contexts.
pub fn value_gp(
    prefs: &[PreferenceMatrix],
    pi1: &[ActionDistribution],
    pi2: &[ActionDistribution],
    reference: &ActionDistribution,
    eta: f64,
) -> Result<f64> {
    check_same_len("first-player policies", prefs.len(), pi1.len())?;
    check_same_len("second-player policies", prefs.len(), pi2.len())?;
    let mut total = 0.0;
    for ((p, a), b) in prefs.iter().zip(pi1).zip(pi2) {
        total += p.expected(a, b) - a.kl_divergence(reference)? / eta + b.kl_divergence(reference)? / eta;
    }
    Ok(total / prefs.len() as f64)
}

/// `E_x[R(x, π) − η⁻¹ KL(π‖π0)]` over the given contexts.
pub fn value_bt(
    rewards: &[Vec<f64>],
    pi: &[ActionDistribution],
    reference: &ActionDistribution,
    eta: f64,
) -> Result<f64> {
    check_same_len("policies", rewards.len(), pi.len())?;
    let mut total = 0.0;
    for (r, p) in rewards.iter().zip(pi) {
        total += p.expectation(r) - p.kl_divergence(reference)? / eta;
    }
    Ok(total / rewards.len() as f64)
}

/// `min_{π2} [P(x, π1, π2) + η⁻¹ KL(π2‖π0)] = −η⁻¹ log Σ_a π0(a) e^{−η P(x, π1, a)}`.
pub fn min_player_value(
    prefs: &PreferenceMatrix,
    pi1: &ActionDistribution,
    reference: &ActionDistribution,
    eta: f64,
) -> f64 {
    let g: Vec<f64> = prefs.column_payoffs(pi1).iter().map(|v| -v).collect();
    -log_partition(&g, reference, eta)
}

/// `J*_GP − min_{π2} J_GP(π1, π2)`; the inner minimum is the exact best
/// response at each context.
pub fn delta_gp(pi1: &[ActionDistribution], instance: &Instance, ctxs: &EvalContextSet) -> Result<f64> {
    ctxs.check(instance)?;
    ctxs.check_len("policies", pi1.len())?;
    let reference = instance.reference();
    let eta = instance.eta();
    let mut inner = 0.0;
    for (t, p) in ctxs.truth.iter().zip(pi1) {
        let ContextTruth::Gp { prefs, .. } = t else {
            return Err(Error::VariantMismatch("delta_gp on a BT instance".into()));
        };
        let response = best_response_min(prefs, p, reference, eta);
        inner += prefs.expected(p, &response) - p.kl_divergence(reference)? / eta
            + response.kl_divergence(reference)? / eta;
    }
    Ok(ctxs.optimal_value() - inner / ctxs.len() as f64)
}

/// `J*_BT − J_BT(π)`.
pub fn delta_bt(pi: &[ActionDistribution], instance: &Instance, ctxs: &EvalContextSet) -> Result<f64> {
    ctxs.check(instance)?;
    ctxs.check_len("policies", pi.len())?;
    let reference = instance.reference();
    let eta = instance.eta();
    // Per-context differences keep cancellation local.
    let mut total = 0.0;
    for (t, p) in ctxs.truth.iter().zip(pi) {
        let ContextTruth::Bt { rewards, log_partition, .. } = t else {
            return Err(Error::VariantMismatch("delta_bt on a GP instance".into()));
        };
        total += log_partition - (p.expectation(rewards) - p.kl_divergence(reference)? / eta);
    }
    Ok(total / ctxs.len() as f64)
}

/// Suboptimality gap of a context-indexed policy under the instance's model.
pub fn policy_gap(
    instance: &Instance,
    ctxs: &EvalContextSet,
    policy: &LearnedPolicy,
    fixed_point: &FixedPointConfig,
) -> Result<f64> {
    ctxs.check(instance)?;
    let pis = ctxs.policies(instance, policy, fixed_point)?;
    match instance.variant() {
        ModelVariant::Gp => delta_gp(&pis, instance, ctxs),
        ModelVariant::Bt => delta_bt(&pis, instance, ctxs),
    }
}

/// Step regret of round `round`: the acting policy's gap, rejected when it
/// is negative beyond the variant's tolerance.
pub fn step_regret(
    instance: &Instance,
    ctxs: &EvalContextSet,
    policy: &LearnedPolicy,
    fixed_point: &FixedPointConfig,
    round: usize,
) -> Result<f64> {
    let value = policy_gap(instance, ctxs, policy, fixed_point)?;
    let tolerance = match instance.variant() {
        ModelVariant::Gp => GP_GAP_TOLERANCE,
        ModelVariant::Bt => BT_GAP_TOLERANCE,
    };
    if value < -tolerance || !value.is_finite() {
        return Err(Error::NegativeRegret {
            round,
            value,
            tolerance,
        });
    }
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimation::EstimatorState;
    use crate::model::{InstanceSpec, ModelParams, RewardMatrix};

    fn fp() -> FixedPointConfig {
        FixedPointConfig::default()
    }

    fn gp_instance(seed: u64) -> Instance {
        Instance::generate(&InstanceSpec::standard(ModelVariant::Gp, seed)).unwrap()
    }

    fn bt_instance(seed: u64) -> Instance {
        Instance::generate(&InstanceSpec::standard(ModelVariant::Bt, seed)).unwrap()
    }

    fn truth_policy(instance: &Instance) -> LearnedPolicy {
        let mut est = EstimatorState::from_params(instance.truth().clone(), None);
        est.fitted_on = 1;
        LearnedPolicy::greedy(&est)
    }

    #[test]
    fn self_play_at_reference_is_one_half() {
        let inst = gp_instance(1);
        let ctxs = EvalContextSet::for_instance(&inst, 20, 3, &fp()).unwrap();
        let prefs = ctxs.true_preferences().unwrap();
        let pi0 = vec![inst.reference().clone(); ctxs.len()];
        let v = value_gp(&prefs, &pi0, &pi0, inst.reference(), inst.eta()).unwrap();
        assert!((v - 0.5).abs() < 1e-15);
    }

    #[test]
    fn truth_has_zero_gap() {
        let inst = gp_instance(2);
        let ctxs = EvalContextSet::for_instance(&inst, 30, 4, &fp()).unwrap();
        let gap = policy_gap(&inst, &ctxs, &truth_policy(&inst), &fp()).unwrap();
        assert!(gap.abs() < 1e-8, "{gap}");

        let inst = bt_instance(2);
        let ctxs = EvalContextSet::for_instance(&inst, 30, 4, &fp()).unwrap();
        let gap = policy_gap(&inst, &ctxs, &truth_policy(&inst), &fp()).unwrap();
        assert!(gap.abs() < 1e-10, "{gap}");
    }

    #[test]
    fn reference_gap_is_positive_and_closed_form_agrees() {
        let inst = gp_instance(5);
        let ctxs = EvalContextSet::for_instance(&inst, 25, 6, &fp()).unwrap();
        let pi0 = vec![inst.reference().clone(); ctxs.len()];
        let gap = delta_gp(&pi0, &inst, &ctxs).unwrap();
        assert!(gap > 0.0);
        let prefs = ctxs.true_preferences().unwrap();
        let closed: f64 = prefs
            .iter()
            .map(|p| min_player_value(p, inst.reference(), inst.reference(), inst.eta()))
            .sum::<f64>()
            / ctxs.len() as f64;
        assert!((gap - (0.5 - closed)).abs() < 1e-12);

        let inst = bt_instance(5);
        let ctxs = EvalContextSet::for_instance(&inst, 25, 6, &fp()).unwrap();
        let pi0 = vec![inst.reference().clone(); ctxs.len()];
        let gap = delta_bt(&pi0, &inst, &ctxs).unwrap();
        let rewards = ctxs.true_rewards().unwrap();
        let mean_reward: f64 =
            rewards.iter().map(|r| inst.reference().expectation(r)).sum::<f64>() / rewards.len() as f64;
        assert!((gap - (ctxs.optimal_value() - mean_reward)).abs() < 1e-12);
        assert!(gap > 0.0);
    }

    #[test]
    fn log_partition_identity() {
        let inst = bt_instance(7).with_eta(2.5).unwrap();
        let ctxs = EvalContextSet::for_instance(&inst, 40, 1, &fp()).unwrap();
        let v = value_bt(&ctxs.true_rewards().unwrap(), &ctxs.optimal_policies(), inst.reference(), inst.eta()).unwrap();
        assert!((v - ctxs.optimal_value()).abs() < 1e-10);
    }

    #[test]
    fn stale_sets_are_rejected() {
        let inst = bt_instance(1);
        let ctxs = EvalContextSet::for_instance(&inst, 5, 1, &fp()).unwrap();
        let other = inst.with_eta(2.0).unwrap();
        let pis = vec![inst.reference().clone(); 5];
        assert_eq!(delta_bt(&pis, &other, &ctxs), Err(Error::StaleEvalSet));
        let swapped = inst
            .with_truth(ModelParams::Bt(RewardMatrix::zeros(inst.dim())))
            .unwrap();
        assert_eq!(delta_bt(&pis, &swapped, &ctxs), Err(Error::StaleEvalSet));
    }

    #[test]
    fn finite_context_sets_use_the_whole_list() {
        let mut spec = InstanceSpec::standard(ModelVariant::Bt, 3);
        spec.finite_contexts = 4;
        let inst = Instance::generate(&spec).unwrap();
        let ctxs = EvalContextSet::for_instance(&inst, 200, 9, &fp()).unwrap();
        assert_eq!(ctxs.len(), 4);
    }

    #[test]
    fn step_regret_rejects_broken_oracles() {
        // A set built for a different truth makes the truth policy look better
        // than "optimal"; the check must not silently pass it.
        let inst = bt_instance(4);
        let ctxs = EvalContextSet::for_instance(&inst, 10, 2, &fp()).unwrap();
        let r = step_regret(&inst, &ctxs, &truth_policy(&inst), &fp(), 3).unwrap();
        assert!(r.abs() < 1e-10);
        let mut forged = ctxs.clone();
        for t in &mut forged.truth {
            if let ContextTruth::Bt { log_partition, .. } = t {
                *log_partition -= 1.0;
            }
        }
        assert!(matches!(
            step_regret(&inst, &forged, &truth_policy(&inst), &fp(), 3),
            Err(Error::NegativeRegret { round: 3, .. })
        ));
    }
}
