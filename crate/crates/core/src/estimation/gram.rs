use rand::Rng;

use crate::model::{ContextDistribution, Instance};
use crate::numeric::dot;

/// Default ridge for `Σ0 = λ I`.
pub const DEFAULT_RIDGE: f64 = 1.0;

/// Contexts averaged when estimating `E_{x∼d0}[φ(x, π0)]` for continuous `d0`.
pub const REFERENCE_MEAN_SAMPLES: usize = 10_000;

/// `φ(x, a) = vec(x a')`, row-major: entry `i * k + j` is `x[i] a[j]`.
pub fn feature(x: &[f64], a: &[f64]) -> Vec<f64> {
    x.iter().flat_map(|xi| a.iter().map(move |aj| xi * aj)).collect()
}

/// `E_{x∼d0}[Σ_a π0(a) φ(x, a)]`: exact for a finite context list, otherwise
/// a Monte Carlo average over `samples` contexts.
pub fn reference_feature_mean<R: Rng + ?Sized>(instance: &Instance, samples: usize, rng: &mut R) -> Vec<f64> {
    let k = instance.dim();
    let ref_action: Vec<f64> = (0..k)
        .map(|j| {
            instance
                .actions()
                .iter()
                .zip(instance.reference().probs())
                .map(|(a, p)| p * a[j])
                .sum()
        })
        .collect();
    let mut mean_x = vec![0.0; k];
    let count = match instance.contexts() {
        ContextDistribution::Finite(list) => {
            for x in list {
                for (m, v) in mean_x.iter_mut().zip(x) {
                    *m += v;
                }
            }
            list.len()
        }
        ContextDistribution::UniformCube => {
            let n = samples.max(1);
            for _ in 0..n {
                let x = instance.sample_context(rng);
                for (m, v) in mean_x.iter_mut().zip(&x) {
                    *m += v;
                }
            }
            n
        }
    };
    for m in &mut mean_x {
        *m /= count as f64;
    }
    // φ is bilinear, so the mean factorizes into E[x] ⊗ E_{π0}[a].
    feature(&mean_x, &ref_action)
}

/// Regularized Gram matrix of centered features, with its inverse maintained
/// by Sherman–Morrison updates.
#[derive(Debug, Clone, PartialEq)]
pub struct GramState {
    dim: usize,
    lambda: f64,
    sigma: Vec<f64>,
    sigma_inv: Vec<f64>,
    phi_ref_mean: Vec<f64>,
    updates: usize,
}

impl GramState {
    pub fn new(lambda: f64, phi_ref_mean: Vec<f64>) -> Self {
        assert!(lambda > 0.0, "ridge must be positive");
        let dim = phi_ref_mean.len();
        let mut sigma = vec![0.0; dim * dim];
        let mut sigma_inv = vec![0.0; dim * dim];
        for i in 0..dim {
            sigma[i * dim + i] = lambda;
            sigma_inv[i * dim + i] = 1.0 / lambda;
        }
        Self {
            dim,
            lambda,
            sigma,
            sigma_inv,
            phi_ref_mean,
            updates: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn sigma_inv(&self) -> &[f64] {
        &self.sigma_inv
    }

    pub fn phi_ref_mean(&self) -> &[f64] {
        &self.phi_ref_mean
    }

    pub fn updates(&self) -> usize {
        self.updates
    }

    pub fn centered_feature(&self, x: &[f64], a: &[f64]) -> Vec<f64> {
        let mut phi = feature(x, a);
        for (p, m) in phi.iter_mut().zip(&self.phi_ref_mean) {
            *p -= m;
        }
        phi
    }

    /// `Σ ← Σ + φ̃ φ̃'`.
    pub fn update(&mut self, x: &[f64], a: &[f64]) {
        let v = self.centered_feature(x, a);
        self.rank_one_update(&v);
    }

    /// Functional form of [`GramState::update`].
    pub fn updated(mut self, x: &[f64], a: &[f64]) -> Self {
        self.update(x, a);
        self
    }

    pub fn rank_one_update(&mut self, v: &[f64]) {
        let d = self.dim;
        assert_eq!(v.len(), d);
        for i in 0..d {
            for j in 0..d {
                self.sigma[i * d + j] += v[i] * v[j];
            }
        }
        let u: Vec<f64> = (0..d).map(|i| dot(&self.sigma_inv[i * d..(i + 1) * d], v)).collect();
        let denom = 1.0 + dot(v, &u);
        for i in 0..d {
            for j in i..d {
                let val = self.sigma_inv[i * d + j] - u[i] * u[j] / denom;
                self.sigma_inv[i * d + j] = val;
                self.sigma_inv[j * d + i] = val;
            }
        }
        self.updates += 1;
    }

    /// `‖v‖_{Σ⁻¹}`.
    pub fn inverse_norm(&self, v: &[f64]) -> f64 {
        let d = self.dim;
        let mut q = 0.0;
        for i in 0..d {
            q += v[i] * dot(&self.sigma_inv[i * d..(i + 1) * d], v);
        }
        q.max(0.0).sqrt()
    }

    /// `β ‖φ(x, a) − E[φ(x, π0)]‖_{Σ⁻¹}`.
    pub fn bonus(&self, x: &[f64], a: &[f64], beta: f64) -> f64 {
        if beta == 0.0 {
            return 0.0;
        }
        beta * self.inverse_norm(&self.centered_feature(x, a))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(d: usize, i: usize) -> Vec<f64> {
        let mut v = vec![0.0; d];
        v[i] = 1.0;
        v
    }

    #[test]
    fn identity_gram_gives_unit_norm() {
        let g = GramState::new(1.0, vec![0.0; 4]);
        assert_eq!(g.inverse_norm(&unit(4, 2)), 1.0);
    }

    #[test]
    fn one_update_along_e1_halves_the_squared_norm() {
        let mut g = GramState::new(1.0, vec![0.0; 2]);
        g.rank_one_update(&unit(2, 0));
        assert!((g.inverse_norm(&unit(2, 0)) - 1.0 / 2f64.sqrt()).abs() < 1e-15);
        assert!((g.inverse_norm(&unit(2, 1)) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn bonus_identities() {
        // Centered feature equals e1 when x = e0, a = e0 and the mean is zero.
        let g = GramState::new(1.0, vec![0.0; 4]);
        let x = [1.0, 0.0];
        assert!((g.bonus(&x, &x, 0.3) - 0.3).abs() < 1e-15);
        assert_eq!(g.bonus(&x, &[0.4, 0.7], 0.0), 0.0);
        let b1 = g.bonus(&[0.3, 0.9], &[0.4, 0.7], 0.25);
        let b2 = g.bonus(&[0.3, 0.9], &[0.4, 0.7], 0.5);
        assert!((b2 - 2.0 * b1).abs() < 1e-15);
    }

    #[test]
    fn inverse_tracks_the_gram_matrix() {
        let mut g = GramState::new(1.0, vec![0.1; 9]);
        let xs = [[0.2, 0.5, 0.9], [0.7, 0.1, 0.4], [0.3, 0.3, 0.8], [0.9, 0.6, 0.2]];
        for (i, x) in xs.iter().enumerate() {
            g.update(x, &xs[(i + 1) % xs.len()]);
        }
        let d = g.dim();
        for i in 0..d {
            for j in 0..d {
                let prod: f64 = (0..d).map(|l| g.sigma()[i * d + l] * g.sigma_inv()[l * d + j]).sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((prod - expect).abs() < 1e-12);
                assert_eq!(g.sigma()[i * d + j], g.sigma()[j * d + i]);
            }
        }
    }

    #[test]
    fn bonus_is_non_increasing_along_a_fixed_direction() {
        let mut g = GramState::new(1.0, vec![0.0; 4]);
        let probe = [0.6, -0.3, 0.2, 0.9];
        let mut last = g.inverse_norm(&probe);
        for t in 0..50 {
            let v = [(t as f64 * 0.7).sin(), (t as f64).cos(), 0.3, -0.5];
            g.rank_one_update(&v);
            let now = g.inverse_norm(&probe);
            assert!(now <= last + 1e-15);
            last = now;
        }
    }
}
