//! Linear parameterizations of the preference oracle and the reward function.
//!
//! A general preference model is a nonnegative `k x k x k` tensor `M`; at
//! context `x` it is contracted along its *first* index to the matrix
//! `B = xM` with `B[j][l] = sum_i x[i] M[i][j][l]`, and
//!
//! ```text
//! P(x, a1, a2) = a1' B a2 / (a1' B a2 + a2' B a1).
//! ```
//!
//! A Bradley–Terry model is a `k x k` matrix `W` with reward `R(x, a) = x' W a`
//! and `P(x, a1, a2) = σ(R(x, a1) - R(x, a2))`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{complementary, sigmoid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelVariant {
    /// General preference model (tensor).
    Gp,
    /// Bradley–Terry model (reward matrix).
    Bt,
}

impl ModelVariant {
    pub fn tag(self) -> &'static str {
        match self {
            ModelVariant::Gp => "gp",
            ModelVariant::Bt => "bt",
        }
    }
}

impl std::fmt::Display for ModelVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

/// Nonnegative `k x k x k` tensor, row-major in `(i, j, l)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PreferenceTensor {
    k: usize,
    entries: Vec<f64>,
}

impl PreferenceTensor {
    pub fn new(k: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != k * k * k {
            return Err(Error::DimensionMismatch {
                what: "tensor entries",
                expected: k * k * k,
                actual: entries.len(),
            });
        }
        if let Some(v) = entries.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::InvalidInstance(format!(
                "tensor entries must be finite and nonnegative, found {v}"
            )));
        }
        Ok(Self { k, entries })
    }

    /// Every entry equal to `value`. Any positive constant tensor yields
    /// `P = 1/2` on every pair with nonzero context and actions.
    pub fn constant(k: usize, value: f64) -> Self {
        Self {
            k,
            entries: vec![value; k * k * k],
        }
    }

    pub fn dim(&self) -> usize {
        self.k
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, l: usize) -> f64 {
        self.entries[(i * self.k + j) * self.k + l]
    }

    /// `xM`: contraction of `x` with the first index, row-major `k x k`.
    pub fn contract(&self, x: &[f64]) -> Vec<f64> {
        let k = self.k;
        debug_assert_eq!(x.len(), k);
        let mut b = vec![0.0; k * k];
        for (i, xi) in x.iter().enumerate() {
            if *xi == 0.0 {
                continue;
            }
            let slab = &self.entries[i * k * k..(i + 1) * k * k];
            for (bv, mv) in b.iter_mut().zip(slab) {
                *bv += xi * mv;
            }
        }
        b
    }

    /// `a1' (xM) a2`.
    pub fn bilinear(&self, x: &[f64], a1: &[f64], a2: &[f64]) -> f64 {
        let b = self.contract(x);
        bilinear_form(&b, self.k, a1, a2)
    }

    /// `P(x, a1, a2)`; errors when both bilinear forms vanish.
    pub fn preference_prob(&self, x: &[f64], a1: &[f64], a2: &[f64]) -> Result<f64> {
        let b = self.contract(x);
        ratio_preference(&b, self.k, a1, a2).ok_or(Error::DegeneratePair { a1: 0, a2: 0 })
    }
}

pub(crate) fn bilinear_form(b: &[f64], k: usize, a1: &[f64], a2: &[f64]) -> f64 {
    let mut s = 0.0;
    for j in 0..k {
        if a1[j] == 0.0 {
            continue;
        }
        let row = &b[j * k..(j + 1) * k];
        s += a1[j] * crate::numeric::dot(row, a2);
    }
    s
}

/// Ratio preference from a contracted matrix, or `None` when both forms are zero.
pub(crate) fn ratio_preference(b: &[f64], k: usize, a1: &[f64], a2: &[f64]) -> Option<f64> {
    let u = bilinear_form(b, k, a1, a2);
    let v = bilinear_form(b, k, a2, a1);
    ratio_from_forms(u, v)
}

/// `u / (u + v)`, evaluated so that swapping `u` and `v` gives the exact complement.
pub(crate) fn ratio_from_forms(u: f64, v: f64) -> Option<f64> {
    let total = u + v;
    if total <= 0.0 {
        return None;
    }
    Some(if u >= v {
        complementary(u / total).0
    } else {
        complementary(v / total).1
    })
}

/// `k x k` reward matrix, row-major. `R(x, a) = x' W a`.
#[derive(Debug, Clone, PartialEq)]
pub struct RewardMatrix {
    k: usize,
    entries: Vec<f64>,
}

impl RewardMatrix {
    pub fn new(k: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != k * k {
            return Err(Error::DimensionMismatch {
                what: "reward matrix entries",
                expected: k * k,
                actual: entries.len(),
            });
        }
        if let Some(v) = entries.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidInstance(format!(
                "reward matrix entries must be finite, found {v}"
            )));
        }
        Ok(Self { k, entries })
    }

    pub fn zeros(k: usize) -> Self {
        Self {
            k,
            entries: vec![0.0; k * k],
        }
    }

    pub fn dim(&self) -> usize {
        self.k
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// `W a`.
    pub fn apply(&self, a: &[f64]) -> Vec<f64> {
        let k = self.k;
        (0..k)
            .map(|i| crate::numeric::dot(&self.entries[i * k..(i + 1) * k], a))
            .collect()
    }

    pub fn reward(&self, x: &[f64], a: &[f64]) -> f64 {
        crate::numeric::dot(x, &self.apply(a))
    }

    pub fn preference_prob(&self, x: &[f64], a1: &[f64], a2: &[f64]) -> f64 {
        logistic_preference(self.reward(x, a1), self.reward(x, a2))
    }
}

/// `σ(r1 - r2)` with the two orderings summing to exactly one.
pub(crate) fn logistic_preference(r1: f64, r2: f64) -> f64 {
    let z = r1 - r2;
    if z >= 0.0 {
        complementary(sigmoid(z)).0
    } else {
        complementary(sigmoid(-z)).1
    }
}

/// Ground-truth or estimated model parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelParams {
    Gp(PreferenceTensor),
    Bt(RewardMatrix),
}

impl ModelParams {
    pub fn variant(&self) -> ModelVariant {
        match self {
            ModelParams::Gp(_) => ModelVariant::Gp,
            ModelParams::Bt(_) => ModelVariant::Bt,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            ModelParams::Gp(m) => m.dim(),
            ModelParams::Bt(w) => w.dim(),
        }
    }

    pub fn entries(&self) -> &[f64] {
        match self {
            ModelParams::Gp(m) => m.entries(),
            ModelParams::Bt(w) => w.entries(),
        }
    }

    pub fn preference_prob(&self, x: &[f64], a1: &[f64], a2: &[f64]) -> Result<f64> {
        match self {
            ModelParams::Gp(m) => m.preference_prob(x, a1, a2),
            ModelParams::Bt(w) => Ok(w.preference_prob(x, a1, a2)),
        }
    }

    pub fn as_tensor(&self) -> Result<&PreferenceTensor> {
        match self {
            ModelParams::Gp(m) => Ok(m),
            ModelParams::Bt(_) => Err(Error::VariantMismatch(
                "expected a preference tensor, found a reward matrix".into(),
            )),
        }
    }

    pub fn as_reward(&self) -> Result<&RewardMatrix> {
        match self {
            ModelParams::Bt(w) => Ok(w),
            ModelParams::Gp(_) => Err(Error::VariantMismatch(
                "expected a reward matrix, found a preference tensor".into(),
            )),
        }
    }
}
