//! Single-context KL-regularized policy computations: Gibbs policies, best
//! responses and the symmetric Nash equilibrium of the preference game.

use crate::error::{Error, Result};
use crate::model::distribution::ActionDistribution;

/// Pairwise preference probabilities `P(x, i, j)` at one fixed context.
#[derive(Debug, Clone, PartialEq)]
pub struct PreferenceMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl PreferenceMatrix {
    pub fn new(n: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::DimensionMismatch {
                what: "preference matrix entries",
                expected: n * n,
                actual: entries.len(),
            });
        }
        if let Some(p) = entries.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::InvalidArgument(format!(
                "preference probability {p} outside [0, 1]"
            )));
        }
        Ok(Self { n, entries })
    }

    pub fn from_fn<F>(n: usize, mut f: F) -> Result<Self>
    where
        F: FnMut(usize, usize) -> Result<f64>,
    {
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                entries.push(f(i, j)?);
            }
        }
        Self::new(n, entries)
    }

    pub fn constant(n: usize, value: f64) -> Self {
        Self {
            n,
            entries: vec![value; n * n],
        }
    }

    pub fn n_actions(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn prob(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    /// `P(x, a, π)` for every action `a`.
    pub fn row_payoffs(&self, opponent: &ActionDistribution) -> Vec<f64> {
        let q = opponent.probs();
        (0..self.n)
            .map(|i| crate::numeric::dot(&self.entries[i * self.n..(i + 1) * self.n], q))
            .collect()
    }

    /// `P(x, π, a)` for every action `a`.
    pub fn column_payoffs(&self, proposer: &ActionDistribution) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (i, pi) in proposer.probs().iter().enumerate() {
            let row = &self.entries[i * self.n..(i + 1) * self.n];
            for (o, p) in out.iter_mut().zip(row) {
                *o += pi * p;
            }
        }
        out
    }

    /// `P(x, π1, π2)`.
    pub fn expected(&self, pi1: &ActionDistribution, pi2: &ActionDistribution) -> f64 {
        pi1.expectation(&self.row_payoffs(pi2))
    }
}

/// `π(a) ∝ π0(a) exp(η f(a))`, with the maximum exponent subtracted first.
pub fn gibbs_policy(f: &[f64], reference: &ActionDistribution, eta: f64) -> ActionDistribution {
    assert_eq!(f.len(), reference.len(), "payoff/reference length mismatch");
    let top = f.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let weights = reference
        .probs()
        .iter()
        .zip(f)
        .map(|(p0, v)| p0 * (eta * (v - top)).exp())
        .collect();
    ActionDistribution::from_weights(weights)
}

/// `η⁻¹ log Σ_a π0(a) exp(η f(a))`, the optimal value of `max_π E_π f − η⁻¹ KL(π, π0)`.
pub fn log_partition(f: &[f64], reference: &ActionDistribution, eta: f64) -> f64 {
    assert_eq!(f.len(), reference.len());
    let top = f.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let z: f64 = reference
        .probs()
        .iter()
        .zip(f)
        .map(|(p0, v)| p0 * (eta * (v - top)).exp())
        .sum();
    top + z.ln() / eta
}

/// `E_π f − η⁻¹ KL(π, π0)` at a single context.
pub fn regularized_value(
    pi: &ActionDistribution,
    f: &[f64],
    reference: &ActionDistribution,
    eta: f64,
) -> Result<f64> {
    Ok(pi.expectation(f) - pi.kl_divergence(reference)? / eta)
}

/// Max-player best response: Gibbs over `P(x, ·, opponent)`.
pub fn best_response_max(
    prefs: &PreferenceMatrix,
    opponent: &ActionDistribution,
    reference: &ActionDistribution,
    eta: f64,
) -> ActionDistribution {
    gibbs_policy(&prefs.row_payoffs(opponent), reference, eta)
}

/// Min-player best response: Gibbs over `-P(x, proposer, ·)`.
pub fn best_response_min(
    prefs: &PreferenceMatrix,
    proposer: &ActionDistribution,
    reference: &ActionDistribution,
    eta: f64,
) -> ActionDistribution {
    let g: Vec<f64> = prefs.column_payoffs(proposer).iter().map(|v| -v).collect();
    gibbs_policy(&g, reference, eta)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPointConfig {
    pub tol: f64,
    pub max_iter: usize,
    /// Initial step `α` in `π ← (1 − α) π + α Gibbs(π)`.
    pub damping: f64,
    /// Iterations without a new best residual before `α` is halved.
    pub patience: usize,
    /// Smallest step the halving may reach.
    pub min_damping: f64,
}

impl Default for FixedPointConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 10_000,
            damping: 1.0,
            patience: 10,
            min_damping: 1.0 / 64.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NashSolution {
    pub policy: ActionDistribution,
    /// Number of map evaluations performed.
    pub iterations: usize,
    /// `‖π − Gibbs(η P(x, ·, π))‖_∞` of the returned policy.
    pub residual: f64,
    /// Step in effect when the iteration stopped.
    pub damping: f64,
}

/// Symmetric Nash equilibrium of the KL-regularized preference game at one
/// context, found by iterating `π ← Gibbs(η P(x, ·, π))` from `π0`.
///
/// Plain iteration is used until the residual stalls for `patience`
/// iterations; the step is then halved (first to plain averaging).
pub fn nash_fixed_point(
    prefs: &PreferenceMatrix,
    reference: &ActionDistribution,
    eta: f64,
    cfg: &FixedPointConfig,
) -> Result<NashSolution> {
    if !(cfg.tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "fixed-point tolerance must be positive, got {}",
            cfg.tol
        )));
    }
    if !reference.is_strictly_positive() {
        return Err(Error::InvalidArgument(
            "reference policy must be strictly positive".into(),
        ));
    }
    let mut pi = reference.clone();
    let mut damping = cfg.damping.clamp(cfg.min_damping, 1.0);
    let mut best = f64::INFINITY;
    let mut stalled = 0usize;
    let mut residual = f64::INFINITY;
    for it in 1..=cfg.max_iter {
        let target = best_response_max(prefs, &pi, reference, eta);
        residual = pi.max_abs_diff(&target);
        if residual <= cfg.tol {
            return Ok(NashSolution {
                policy: pi,
                iterations: it,
                residual,
                damping,
            });
        }
        if residual < best {
            best = residual;
            stalled = 0;
        } else {
            stalled += 1;
            if stalled >= cfg.patience && damping > cfg.min_damping {
                damping = (damping * 0.5).max(cfg.min_damping);
                stalled = 0;
                best = residual;
            }
        }
        pi = if damping >= 1.0 {
            target
        } else {
            pi.mix(&target, damping)
        };
    }
    Err(Error::NonConvergence {
        iterations: cfg.max_iter,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_by_two(p01: f64) -> PreferenceMatrix {
        PreferenceMatrix::new(2, vec![0.5, p01, 1.0 - p01, 0.5]).unwrap()
    }

    #[test]
    fn gibbs_identities() {
        let r = ActionDistribution::new(vec![0.2, 0.5, 0.3]).unwrap();
        assert!(gibbs_policy(&[0.0; 3], &r, 2.0).max_abs_diff(&r) < 1e-15);
        assert!(gibbs_policy(&[0.1, 0.9, 0.4], &r, 0.0).max_abs_diff(&r) < 1e-15);
        let e = std::f64::consts::E;
        let p = gibbs_policy(&[1.0, 0.0], &ActionDistribution::uniform(2), 1.0);
        assert!((p.probs()[0] - e / (e + 1.0)).abs() < 1e-15);
        assert!((p.probs()[1] - 1.0 / (e + 1.0)).abs() < 1e-15);
    }

    #[test]
    fn gibbs_survives_huge_exponents() {
        let r = ActionDistribution::uniform(3);
        let p = gibbs_policy(&[1e4, 0.0, -1e4], &r, 10.0);
        assert_eq!(p.probs()[0], 1.0);
        let total: f64 = p.probs().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn log_partition_equals_optimal_value() {
        let r = ActionDistribution::new(vec![0.1, 0.6, 0.3]).unwrap();
        let f = [0.3, 0.8, 0.1];
        for eta in [0.5, 1.0, 3.0] {
            let pi = gibbs_policy(&f, &r, eta);
            let v = regularized_value(&pi, &f, &r, eta).unwrap();
            assert!((v - log_partition(&f, &r, eta)).abs() < 1e-14);
        }
    }

    #[test]
    fn constant_preferences_make_reference_a_one_step_fixed_point() {
        let r = ActionDistribution::new(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let prefs = PreferenceMatrix::constant(4, 0.5);
        assert!(best_response_max(&prefs, &r, &r, 1.0).max_abs_diff(&r) < 1e-16);
        assert!(best_response_min(&prefs, &r, &r, 1.0).max_abs_diff(&r) < 1e-16);
        let sol = nash_fixed_point(&prefs, &r, 1.0, &FixedPointConfig::default()).unwrap();
        assert_eq!(sol.iterations, 1);
        assert_eq!(sol.policy, r);
    }

    #[test]
    fn best_response_against_point_mass() {
        let prefs = PreferenceMatrix::new(
            3,
            vec![0.5, 0.8, 0.3, 0.2, 0.5, 0.6, 0.7, 0.4, 0.5],
        )
        .unwrap();
        let r = ActionDistribution::uniform(3);
        let opp = ActionDistribution::point_mass(3, 1);
        let br = best_response_max(&prefs, &opp, &r, 2.0);
        let direct = gibbs_policy(&[0.8, 0.5, 0.4], &r, 2.0);
        assert!(br.max_abs_diff(&direct) < 1e-15);

        let prop = ActionDistribution::point_mass(3, 2);
        let br = best_response_min(&prefs, &prop, &r, 2.0);
        let direct = gibbs_policy(&[-0.7, -0.4, -0.5], &r, 2.0);
        assert!(br.max_abs_diff(&direct) < 1e-15);
    }

    #[test]
    fn nash_of_two_action_game_is_self_best_response() {
        let prefs = two_by_two(0.9);
        let r = ActionDistribution::uniform(2);
        let cfg = FixedPointConfig::default();
        let sol = nash_fixed_point(&prefs, &r, 1.0, &cfg).unwrap();
        assert!(sol.residual <= cfg.tol);
        let pi = &sol.policy;
        assert!(best_response_max(&prefs, pi, &r, 1.0).max_abs_diff(pi) <= 1e-9);
        assert!(best_response_min(&prefs, pi, &r, 1.0).max_abs_diff(pi) <= 1e-9);
        assert!(pi.probs()[0] > 0.5);
    }

    #[test]
    fn damping_rescues_an_oscillating_iteration() {
        // Strong cyclic preferences with a large eta make plain iteration cycle.
        let prefs = PreferenceMatrix::new(
            3,
            vec![0.5, 1.0, 0.0, 0.0, 0.5, 1.0, 1.0, 0.0, 0.5],
        )
        .unwrap();
        let r = ActionDistribution::new(vec![0.6, 0.3, 0.1]).unwrap();
        let cfg = FixedPointConfig::default();
        let sol = nash_fixed_point(&prefs, &r, 25.0, &cfg).unwrap();
        assert!(sol.damping < 1.0);
        assert!(sol.residual <= cfg.tol);
    }

    #[test]
    fn non_convergence_reports_residual() {
        let prefs = two_by_two(1.0);
        let r = ActionDistribution::new(vec![0.3, 0.7]).unwrap();
        let cfg = FixedPointConfig {
            max_iter: 1,
            ..Default::default()
        };
        match nash_fixed_point(&prefs, &r, 1.0, &cfg) {
            Err(Error::NonConvergence {
                iterations,
                residual,
            }) => {
                assert_eq!(iterations, 1);
                assert!(residual > 0.0);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn expected_preference_of_self_play_is_half() {
        let prefs = two_by_two(0.85);
        let pi = ActionDistribution::new(vec![0.37, 0.63]).unwrap();
        assert!((prefs.expected(&pi, &pi) - 0.5).abs() < 1e-15);
    }
}
