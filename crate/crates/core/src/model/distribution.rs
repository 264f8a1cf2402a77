use rand::Rng;

use crate::error::{Error, Result};

/// Tolerance on the total mass of a validated distribution.
pub const MASS_TOLERANCE: f64 = 1e-12;

/// A probability vector over the finite action set at one context.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionDistribution {
    probs: Vec<f64>,
}

impl ActionDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDistribution("empty probability vector".into()));
        }
        if let Some((i, p)) = probs
            .iter()
            .enumerate()
            .find(|(_, p)| !p.is_finite() || **p < 0.0)
        {
            return Err(Error::InvalidDistribution(format!(
                "entry {i} is {p}, expected a finite nonnegative value"
            )));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "entries sum to {total}, expected 1"
            )));
        }
        Ok(Self { probs })
    }

    /// Normalizes nonnegative weights. Panics if the weights carry no mass.
    pub(crate) fn from_weights(mut weights: Vec<f64>) -> Self {
        let total: f64 = weights.iter().sum();
        assert!(
            total > 0.0 && total.is_finite(),
            "weights must have positive finite mass, got {total}"
        );
        for w in &mut weights {
            *w /= total;
        }
        Self { probs: weights }
    }

    pub fn uniform(n: usize) -> Self {
        assert!(n > 0, "uniform distribution needs at least one action");
        Self {
            probs: vec![1.0 / n as f64; n],
        }
    }

    pub fn point_mass(n: usize, index: usize) -> Self {
        assert!(index < n);
        let mut probs = vec![0.0; n];
        probs[index] = 1.0;
        Self { probs }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.probs.iter().all(|p| *p > 0.0)
    }

    /// `KL(self || reference)`, with `0 log 0 = 0`.
    pub fn kl_divergence(&self, reference: &ActionDistribution) -> Result<f64> {
        if self.len() != reference.len() {
            return Err(Error::DimensionMismatch {
                what: "KL divergence operands",
                expected: reference.len(),
                actual: self.len(),
            });
        }
        let mut kl = 0.0;
        for (action, (p, q)) in self.probs.iter().zip(&reference.probs).enumerate() {
            if *p == 0.0 {
                continue;
            }
            if *q == 0.0 {
                return Err(Error::KlUndefined { action, mass: *p });
            }
            kl += p * (p / q).ln();
        }
        Ok(kl)
    }

    pub fn expectation(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.len());
        self.probs.iter().zip(values).map(|(p, v)| p * v).sum()
    }

    /// Inverse-CDF draw; consumes exactly one uniform from `rng`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for (i, p) in self.probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return i;
            }
        }
        // Rounding can leave `acc` a hair below 1; fall back to the last
        // action that carries mass.
        self.probs
            .iter()
            .rposition(|p| *p > 0.0)
            .expect("distribution has mass")
    }

    pub fn max_abs_diff(&self, other: &ActionDistribution) -> f64 {
        crate::numeric::max_abs_diff(&self.probs, &other.probs)
    }

    pub fn total_variation(&self, other: &ActionDistribution) -> f64 {
        0.5 * self
            .probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
    }

    /// `(1 - w) * self + w * other`.
    pub fn mix(&self, other: &ActionDistribution, w: f64) -> ActionDistribution {
        let probs = self
            .probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (1.0 - w) * a + w * b)
            .collect();
        ActionDistribution::from_weights(probs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rejects_bad_vectors() {
        assert!(ActionDistribution::new(vec![]).is_err());
        assert!(ActionDistribution::new(vec![0.5, 0.6]).is_err());
        assert!(ActionDistribution::new(vec![1.5, -0.5]).is_err());
        assert!(ActionDistribution::new(vec![f64::NAN, 1.0]).is_err());
        assert!(ActionDistribution::new(vec![0.25, 0.75]).is_ok());
    }

    #[test]
    fn kl_is_zero_on_self_and_errors_off_support() {
        let p = ActionDistribution::new(vec![0.2, 0.3, 0.5]).unwrap();
        assert_eq!(p.kl_divergence(&p).unwrap(), 0.0);
        let q = ActionDistribution::new(vec![0.5, 0.5, 0.0]).unwrap();
        assert!(matches!(
            p.kl_divergence(&q),
            Err(Error::KlUndefined { action: 2, .. })
        ));
        // point mass against uniform: ln n
        let pm = ActionDistribution::point_mass(4, 1);
        let kl = pm.kl_divergence(&ActionDistribution::uniform(4)).unwrap();
        assert!((kl - 4f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn sampling_frequencies_follow_probs() {
        let p = ActionDistribution::new(vec![0.1, 0.6, 0.3]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut counts = [0usize; 3];
        let n = 100_000;
        for _ in 0..n {
            counts[p.sample(&mut rng)] += 1;
        }
        for (c, q) in counts.iter().zip(p.probs()) {
            assert!((*c as f64 / n as f64 - q).abs() < 0.01);
        }
    }

    #[test]
    fn point_mass_never_samples_elsewhere() {
        let p = ActionDistribution::point_mass(5, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        assert!((0..1000).all(|_| p.sample(&mut rng) == 4));
    }
}
