use prefbandit::model::{
    best_response_max, best_response_min, gibbs_policy, log_partition, nash_fixed_point, regularized_value,
    ActionDistribution, FixedPointConfig, Instance, InstanceSpec, ModelVariant, PreferenceMatrix, PreferenceTensor,
    RewardMatrix,
};
use proptest::prelude::*;

fn distribution(n: usize) -> impl Strategy<Value = ActionDistribution> {
    proptest::collection::vec(0.05f64..1.0, n).prop_map(|w| {
        let s: f64 = w.iter().sum();
        ActionDistribution::new(w.iter().map(|v| v / s).collect()).unwrap()
    })
}

fn payoffs(n: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(0.0f64..=1.0, n)
}

fn unit_vec(k: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(0.0f64..=1.0, k)
}

proptest! {
    #[test]
    fn gibbs_ratio_stays_within_exp_eta(
        (f, reference) in (2usize..8).prop_flat_map(|n| (payoffs(n), distribution(n))),
        eta in prop::sample::select(vec![0.5, 1.0, 2.0, 3.0]),
    ) {
        let pi = gibbs_policy(&f, &reference, eta);
        for (p, p0) in pi.probs().iter().zip(reference.probs()) {
            let r = p / p0;
            prop_assert!(*p > 0.0);
            prop_assert!(r >= (-eta).exp() - 1e-10 && r <= eta.exp() + 1e-10);
        }
        prop_assert!((pi.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn log_partition_is_the_regularized_optimum(
        (f, reference, other) in (2usize..8).prop_flat_map(|n| (payoffs(n), distribution(n), distribution(n))),
        eta in 0.1f64..5.0,
    ) {
        let pi = gibbs_policy(&f, &reference, eta);
        let best = regularized_value(&pi, &f, &reference, eta).unwrap();
        prop_assert!((best - log_partition(&f, &reference, eta)).abs() < 1e-12);
        prop_assert!(regularized_value(&other, &f, &reference, eta).unwrap() <= best + 1e-12);
    }

    #[test]
    fn value_decomposition_bound(
        (f, f_star, reference) in (2usize..8).prop_flat_map(|n| (payoffs(n), payoffs(n), distribution(n))),
        eta in 0.1f64..4.0,
    ) {
        let v = |g: &[f64]| regularized_value(&gibbs_policy(g, &reference, eta), &f_star, &reference, eta).unwrap();
        let gap = v(&f_star) - v(&f);
        let bound = eta * f.iter().zip(&f_star).map(|(a, b)| (a - b).powi(2)).fold(0.0, f64::max);
        prop_assert!(gap >= -1e-12, "gap {}", gap);
        prop_assert!(gap <= bound + 1e-12, "gap {} bound {}", gap, bound);
    }

    #[test]
    fn tensor_preferences_are_antisymmetric(
        entries in proptest::collection::vec(0.01f64..1.0, 27),
        x in unit_vec(3), a in unit_vec(3), b in unit_vec(3),
    ) {
        let m = PreferenceTensor::new(3, entries).unwrap();
        if let (Ok(p), Ok(q)) = (m.preference_prob(&x, &a, &b), m.preference_prob(&x, &b, &a)) {
            prop_assert_eq!(p + q, 1.0);
            prop_assert!((0.0..=1.0).contains(&p));
        }
        if let Ok(p) = m.preference_prob(&x, &a, &a) {
            prop_assert_eq!(p, 0.5);
        }
    }

    #[test]
    fn logistic_preferences_are_antisymmetric(
        entries in proptest::collection::vec(0.0f64..1.0, 9),
        x in unit_vec(3), a in unit_vec(3), b in unit_vec(3),
    ) {
        let w = RewardMatrix::new(3, entries).unwrap();
        prop_assert_eq!(w.preference_prob(&x, &a, &b) + w.preference_prob(&x, &b, &a), 1.0);
        prop_assert_eq!(w.preference_prob(&x, &a, &a), 0.5);
    }

    #[test]
    fn best_responses_dominate_the_reference(
        seed in 0u64..500,
        opponent in distribution(6),
        eta in 0.25f64..3.0,
    ) {
        let inst = Instance::generate(&InstanceSpec::standard(ModelVariant::Gp, seed)).unwrap();
        let prefs = inst.true_preferences(&[0.3, 0.6, 0.9, 0.1, 0.5]).unwrap();
        let reference = inst.reference();
        let row = prefs.row_payoffs(&opponent);
        let br = best_response_max(&prefs, &opponent, reference, eta);
        prop_assert!(
            regularized_value(&br, &row, reference, eta).unwrap()
                >= regularized_value(reference, &row, reference, eta).unwrap() - 1e-12
        );
        let col: Vec<f64> = prefs.column_payoffs(&opponent).iter().map(|v| -v).collect();
        let br = best_response_min(&prefs, &opponent, reference, eta);
        prop_assert!(
            regularized_value(&br, &col, reference, eta).unwrap()
                >= regularized_value(reference, &col, reference, eta).unwrap() - 1e-12
        );
    }

    #[test]
    fn nash_is_a_best_response_for_both_players(seed in 0u64..1000) {
        let inst = Instance::generate(&InstanceSpec::standard(ModelVariant::Gp, seed)).unwrap();
        let x = vec![0.2, 0.4, 0.6, 0.8, 0.35];
        let prefs = inst.true_preferences(&x).unwrap();
        let sol = nash_fixed_point(&prefs, inst.reference(), inst.eta(), &FixedPointConfig::default()).unwrap();
        let tol = 1e-9;
        prop_assert!(sol.residual <= 1e-10);
        prop_assert!(best_response_max(&prefs, &sol.policy, inst.reference(), inst.eta()).max_abs_diff(&sol.policy) <= tol);
        prop_assert!(best_response_min(&prefs, &sol.policy, inst.reference(), inst.eta()).max_abs_diff(&sol.policy) <= tol);
    }
}

#[test]
fn best_response_to_a_point_mass_is_a_direct_gibbs() {
    let prefs = PreferenceMatrix::new(3, vec![0.5, 0.8, 0.3, 0.2, 0.5, 0.6, 0.7, 0.4, 0.5]).unwrap();
    let reference = ActionDistribution::new(vec![0.2, 0.3, 0.5]).unwrap();
    let star = ActionDistribution::point_mass(3, 1);
    let br = best_response_max(&prefs, &star, &reference, 1.5);
    let direct = gibbs_policy(&[0.8, 0.5, 0.4], &reference, 1.5);
    assert!(br.max_abs_diff(&direct) < 1e-15);
    let br = best_response_min(&prefs, &star, &reference, 1.5);
    let direct = gibbs_policy(&[-0.2, -0.5, -0.6], &reference, 1.5);
    assert!(br.max_abs_diff(&direct) < 1e-15);
}

#[test]
fn gibbs_trivial_cases() {
    let reference = ActionDistribution::new(vec![0.1, 0.6, 0.3]).unwrap();
    assert_eq!(gibbs_policy(&[0.0; 3], &reference, 2.0).probs(), reference.probs());
    let pi = gibbs_policy(&[0.9, 0.1, 0.4], &reference, 0.0);
    assert!(pi.max_abs_diff(&reference) < 1e-15);
}
