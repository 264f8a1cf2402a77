use crate::error::{Error, Result};
use crate::estimation::PreferenceDataset;
use crate::model::{ActionDistribution, ContextDistribution, Instance};

/// `max_{x, a1, a2} π1(a1|x) π2(a2|x) / (μ1(a1|x) μ2(a2|x))`, where `μ1`, `μ2`
/// are the dataset's per-context action frequencies in each slot.
///
/// Needs a finite context list; `pi1[i]` and `pi2[i]` are the policies at the
/// i-th listed context. Cells with positive target mass but no data (including
/// listed contexts absent from the dataset) give `f64::INFINITY`.
pub fn coverage_coefficient(
    instance: &Instance,
    data: &PreferenceDataset,
    pi1: &[ActionDistribution],
    pi2: &[ActionDistribution],
) -> Result<f64> {
    let ContextDistribution::Finite(list) = instance.contexts() else {
        return Err(Error::ContinuousContexts);
    };
    let n_a = instance.n_actions();
    for (what, pis) in [("first-slot policies", pi1), ("second-slot policies", pi2)] {
        if pis.len() != list.len() {
            return Err(Error::DimensionMismatch {
                what,
                expected: list.len(),
                actual: pis.len(),
            });
        }
    }
    data.check_actions(n_a)?;
    let mut first = vec![vec![0usize; n_a]; list.len()];
    let mut second = vec![vec![0usize; n_a]; list.len()];
    let mut totals = vec![0usize; list.len()];
    for r in data.records() {
        let i = list.iter().position(|x| *x == r.x).ok_or(Error::UnknownContext)?;
        first[i][r.a1] += 1;
        second[i][r.a2] += 1;
        totals[i] += 1;
    }
    let mut worst: f64 = 0.0;
    for i in 0..list.len() {
        for a1 in 0..n_a {
            for a2 in 0..n_a {
                let target = pi1[i].probs()[a1] * pi2[i].probs()[a2];
                if target <= 0.0 {
                    continue;
                }
                let mass = (first[i][a1] * second[i][a2]) as f64;
                if mass == 0.0 {
                    return Ok(f64::INFINITY);
                }
                let n = totals[i] as f64;
                worst = worst.max(target * n * n / mass);
            }
        }
    }
    Ok(worst)
}
