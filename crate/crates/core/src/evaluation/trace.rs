use crate::learners::RoundLog;

/// Step regret and its running sum for one seeded run.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretTrace {
    pub seed: u64,
    pub config_hash: u64,
    /// `(t, step regret)` for the evaluated rounds, in round order.
    pub steps: Vec<(usize, f64)>,
    /// Prefix sums of the step regrets.
    pub cumulative: Vec<f64>,
}

impl RegretTrace {
    pub fn new(seed: u64, config_hash: u64) -> Self {
        Self {
            seed,
            config_hash,
            steps: Vec::new(),
            cumulative: Vec::new(),
        }
    }

    pub fn from_rounds(seed: u64, config_hash: u64, rounds: &[RoundLog]) -> Self {
        let mut trace = Self::new(seed, config_hash);
        for r in rounds {
            if let Some(v) = r.step_regret {
                trace.push(r.t, v);
            }
        }
        trace
    }

    pub fn push(&mut self, t: usize, step_regret: f64) {
        debug_assert!(self.steps.last().is_none_or(|(last, _)| *last < t));
        let prev = self.cumulative.last().copied().unwrap_or(0.0);
        self.steps.push((t, step_regret));
        self.cumulative.push(prev + step_regret);
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }

    /// Sum of step regrets over rounds `t` with `lo < t <= hi`.
    pub fn sum_over(&self, lo: usize, hi: usize) -> f64 {
        self.steps.iter().filter(|(t, _)| *t > lo && *t <= hi).map(|(_, v)| v).sum()
    }

    /// Mean step regret over rounds `t` with `lo < t <= hi`, NaN if none.
    pub fn mean_over(&self, lo: usize, hi: usize) -> f64 {
        let sel: Vec<f64> = self
            .steps
            .iter()
            .filter(|(t, _)| *t > lo && *t <= hi)
            .map(|(_, v)| *v)
            .collect();
        sel.iter().sum::<f64>() / sel.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cumulative_is_the_prefix_sum() {
        let mut tr = RegretTrace::new(1, 2);
        for (t, v) in [(1, 0.5), (2, 0.25), (4, 0.125)] {
            tr.push(t, v);
        }
        assert_eq!(tr.cumulative, vec![0.5, 0.75, 0.875]);
        assert_eq!(tr.sum_over(1, 4), 0.375);
        assert_eq!(tr.mean_over(0, 2), 0.375);
        assert!(tr.mean_over(5, 9).is_nan());
    }
}
