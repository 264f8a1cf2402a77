//! Maximum-likelihood fitting by full-batch projected gradient ascent.
//!
//! Both fitters maximize the *mean* log-likelihood
//! `n⁻¹ Σ y log P(x, a1, a2) + (1 − y) log P(x, a2, a1)` over a box
//! (`[0, ∞)` for tensor entries, `[0, reward_scale]` for reward-matrix
//! entries). Steps start from a Barzilai–Borwein length and are halved until
//! the Armijo condition holds, so accepted iterates never lower the objective.
//!
//! Records only enter through their action indices, so each objective
//! evaluation first contracts the parameters against every ordered action
//! pair and then touches each record with `O(k)` work.

use crate::error::{Error, Result};
use crate::estimation::data::PreferenceDataset;
use crate::model::{ModelParams, PreferenceTensor, RewardMatrix};
use crate::numeric::{dot, log_sigmoid, sigmoid};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerConfig {
    pub max_iter: usize,
    /// Stop once the projected gradient's max-norm falls to this value.
    pub grad_tol: f64,
    pub armijo: f64,
    pub max_halvings: usize,
    pub initial_step: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            max_iter: 500,
            grad_tol: 1e-6,
            armijo: 1e-4,
            max_halvings: 60,
            initial_step: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitReport<P> {
    pub params: P,
    /// Accepted ascent steps.
    pub iterations: usize,
    /// Max-norm of the projected gradient at `params`.
    pub grad_norm: f64,
    /// Mean log-likelihood at `params`.
    pub objective: f64,
    pub converged: bool,
    /// Step length to start the next warm-started fit with.
    pub next_step: f64,
    /// Objective at the start point followed by one entry per accepted step.
    pub trace: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
struct Bounds {
    lower: f64,
    upper: f64,
}

impl Bounds {
    fn project(&self, x: &mut [f64]) {
        for v in x {
            *v = v.clamp(self.lower, self.upper);
        }
    }

    fn projected_grad_norm(&self, x: &[f64], g: &[f64]) -> f64 {
        x.iter()
            .zip(g)
            .map(|(xi, gi)| {
                if (*xi <= self.lower && *gi < 0.0) || (*xi >= self.upper && *gi > 0.0) {
                    0.0
                } else {
                    gi.abs()
                }
            })
            .fold(0.0, f64::max)
    }
}

struct Ascent {
    x: Vec<f64>,
    iterations: usize,
    grad_norm: f64,
    objective: f64,
    converged: bool,
    next_step: f64,
    trace: Vec<f64>,
}

/// Target mean entry of a tensor iterate. The ratio-form likelihood is
/// invariant to `M → cM`, and its gradient scales by `1/c`, so without a fixed
/// scale the iterate can drift until the gradient test passes spuriously.
const GP_GAUGE_MEAN: f64 = 0.5;

fn projected_ascent<F>(
    mut x: Vec<f64>,
    bounds: Bounds,
    cfg: &OptimizerConfig,
    gauge_mean: Option<f64>,
    mut eval: F,
) -> Result<Ascent>
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    bounds.project(&mut x);
    let (mut f, mut g) = eval(&x);
    if !f.is_finite() {
        return Err(Error::NonFiniteLikelihood);
    }
    let mut trace = vec![f];
    let mut step = if cfg.initial_step > 0.0 && cfg.initial_step.is_finite() {
        cfg.initial_step
    } else {
        1.0
    };
    let mut iterations = 0;
    let mut grad_norm = bounds.projected_grad_norm(&x, &g);
    let mut converged = grad_norm <= cfg.grad_tol;
    let mut candidate = vec![0.0; x.len()];
    while !converged && iterations < cfg.max_iter {
        let mut s = step;
        let mut accepted = None;
        for _ in 0..=cfg.max_halvings {
            for ((c, xi), gi) in candidate.iter_mut().zip(&x).zip(&g) {
                *c = xi + s * gi;
            }
            bounds.project(&mut candidate);
            let ascent: f64 = candidate
                .iter()
                .zip(&x)
                .zip(&g)
                .map(|((c, xi), gi)| (c - xi) * gi)
                .sum();
            if ascent <= 0.0 {
                break;
            }
            let (fc, gc) = eval(&candidate);
            if fc.is_finite() && fc >= f + cfg.armijo * ascent {
                accepted = Some((fc, gc));
                break;
            }
            s *= 0.5;
        }
        let Some((fc, gc)) = accepted else {
            break;
        };
        // Barzilai–Borwein length for the next step (ascent on a concave objective).
        let mut ss = 0.0;
        let mut sy = 0.0;
        for i in 0..x.len() {
            let d = candidate[i] - x[i];
            ss += d * d;
            sy += d * (gc[i] - g[i]);
        }
        step = if sy < 0.0 && ss > 0.0 {
            (ss / -sy).clamp(1e-12, 1e12)
        } else {
            (s * 2.0).min(1e12)
        };
        std::mem::swap(&mut x, &mut candidate);
        f = fc;
        g = gc;
        if let Some(target) = gauge_mean {
            let mean = x.iter().sum::<f64>() / x.len() as f64;
            if mean > 0.0 {
                // Exact reparameterization: x → cx, ∇ → ∇/c, BB length → c² length.
                let c = target / mean;
                x.iter_mut().for_each(|v| *v *= c);
                g.iter_mut().for_each(|v| *v /= c);
                step = (step * c * c).clamp(1e-12, 1e12);
            }
        }
        iterations += 1;
        trace.push(f);
        grad_norm = bounds.projected_grad_norm(&x, &g);
        converged = grad_norm <= cfg.grad_tol;
    }
    Ok(Ascent {
        x,
        iterations,
        grad_norm,
        objective: f,
        converged,
        next_step: step,
        trace,
    })
}

fn check_inputs(data: &PreferenceDataset, actions: &[Vec<f64>], k: usize) -> Result<()> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if data.dim() != k {
        return Err(Error::DimensionMismatch {
            what: "dataset context dimension",
            expected: k,
            actual: data.dim(),
        });
    }
    if let Some(a) = actions.iter().find(|a| a.len() != k) {
        return Err(Error::DimensionMismatch {
            what: "action vector",
            expected: k,
            actual: a.len(),
        });
    }
    data.check_actions(actions.len())
}

/// Mean logistic log-likelihood and its gradient for a flattened `W`.
fn bt_objective(w: &[f64], data: &PreferenceDataset, actions: &[Vec<f64>], k: usize) -> (f64, Vec<f64>) {
    let n_act = actions.len();
    // Wa for every action.
    let wa: Vec<Vec<f64>> = actions
        .iter()
        .map(|a| (0..k).map(|i| dot(&w[i * k..(i + 1) * k], a)).collect())
        .collect();
    // Per-action accumulated dL/d(Wa).
    let mut acc = vec![0.0; n_act * k];
    let mut ll = 0.0;
    for r in data.records() {
        let mut z = 0.0;
        for i in 0..k {
            z += r.x[i] * (wa[r.a1][i] - wa[r.a2][i]);
        }
        let (lp, resid) = if r.y {
            (log_sigmoid(z), 1.0 - sigmoid(z))
        } else {
            (log_sigmoid(-z), -sigmoid(z))
        };
        ll += lp;
        if r.a1 != r.a2 {
            for i in 0..k {
                acc[r.a1 * k + i] += resid * r.x[i];
                acc[r.a2 * k + i] -= resid * r.x[i];
            }
        }
    }
    let n = data.len() as f64;
    let mut grad = vec![0.0; k * k];
    for (p, a) in actions.iter().enumerate() {
        for i in 0..k {
            let c = acc[p * k + i];
            if c == 0.0 {
                continue;
            }
            for j in 0..k {
                grad[i * k + j] += c * a[j];
            }
        }
    }
    for gi in &mut grad {
        *gi /= n;
    }
    (ll / n, grad)
}

/// Box-constrained logistic MLE for the reward matrix, entries in `[0, upper]`.
pub fn fit_bt_mle(
    data: &PreferenceDataset,
    actions: &[Vec<f64>],
    warm_start: &RewardMatrix,
    upper: f64,
    cfg: &OptimizerConfig,
) -> Result<FitReport<RewardMatrix>> {
    let k = warm_start.dim();
    check_inputs(data, actions, k)?;
    let bounds = Bounds { lower: 0.0, upper };
    let out = projected_ascent(warm_start.entries().to_vec(), bounds, cfg, None, |w| {
        bt_objective(w, data, actions, k)
    })?;
    Ok(FitReport {
        params: RewardMatrix::new(k, out.x)?,
        iterations: out.iterations,
        grad_norm: out.grad_norm,
        objective: out.objective,
        converged: out.converged,
        next_step: out.next_step,
        trace: out.trace,
    })
}

/// `C[p][q][i] = a_p' M_i a_q` for all ordered action pairs.
fn pair_contractions(m: &[f64], actions: &[Vec<f64>], k: usize) -> Vec<f64> {
    let n = actions.len();
    let mut out = vec![0.0; n * n * k];
    // M_i a_q, cached per (i, q).
    let mut mq = vec![0.0; k * n * k];
    for i in 0..k {
        for (q, aq) in actions.iter().enumerate() {
            for j in 0..k {
                let row = &m[(i * k + j) * k..(i * k + j + 1) * k];
                mq[(i * n + q) * k + j] = dot(row, aq);
            }
        }
    }
    for (p, ap) in actions.iter().enumerate() {
        for q in 0..n {
            for i in 0..k {
                out[(p * n + q) * k + i] = dot(ap, &mq[(i * n + q) * k..(i * n + q + 1) * k]);
            }
        }
    }
    out
}

/// Mean ratio-form log-likelihood and its gradient for a flattened `M`.
fn gp_objective(m: &[f64], data: &PreferenceDataset, actions: &[Vec<f64>], k: usize) -> (f64, Vec<f64>) {
    let n_act = actions.len();
    let c = pair_contractions(m, actions, k);
    let mut acc = vec![0.0; n_act * n_act * k];
    let mut ll = 0.0;
    for r in data.records() {
        let cu = &c[(r.a1 * n_act + r.a2) * k..(r.a1 * n_act + r.a2 + 1) * k];
        let cv = &c[(r.a2 * n_act + r.a1) * k..(r.a2 * n_act + r.a1 + 1) * k];
        let u = dot(&r.x, cu);
        let v = dot(&r.x, cv);
        let total = u + v;
        let (num, dnum_du) = if r.y { (u, true) } else { (v, false) };
        if !(num > 0.0) || !(total > 0.0) {
            return (f64::NEG_INFINITY, vec![0.0; m.len()]);
        }
        ll += num.ln() - total.ln();
        let inv_total = 1.0 / total;
        let (du, dv) = if dnum_du {
            (1.0 / u - inv_total, -inv_total)
        } else {
            (-inv_total, 1.0 / v - inv_total)
        };
        let base_u = (r.a1 * n_act + r.a2) * k;
        let base_v = (r.a2 * n_act + r.a1) * k;
        for i in 0..k {
            acc[base_u + i] += du * r.x[i];
            acc[base_v + i] += dv * r.x[i];
        }
    }
    let n = data.len() as f64;
    let mut grad = vec![0.0; k * k * k];
    for (p, ap) in actions.iter().enumerate() {
        for (q, aq) in actions.iter().enumerate() {
            let base = (p * n_act + q) * k;
            for i in 0..k {
                let g = acc[base + i];
                if g == 0.0 {
                    continue;
                }
                for j in 0..k {
                    let gj = g * ap[j];
                    let out = &mut grad[(i * k + j) * k..(i * k + j + 1) * k];
                    for (o, al) in out.iter_mut().zip(aq) {
                        *o += gj * al;
                    }
                }
            }
        }
    }
    for gi in &mut grad {
        *gi /= n;
    }
    (ll / n, grad)
}

/// Nonnegative tensor MLE for the ratio-form general preference model.
///
/// The likelihood only sees `M` up to scale; every accepted iterate is
/// rescaled to mean entry 1/2, which leaves all preference probabilities
/// unchanged.
pub fn fit_gp_mle(
    data: &PreferenceDataset,
    actions: &[Vec<f64>],
    warm_start: &PreferenceTensor,
    cfg: &OptimizerConfig,
) -> Result<FitReport<PreferenceTensor>> {
    let k = warm_start.dim();
    check_inputs(data, actions, k)?;
    if warm_start.entries().iter().all(|v| *v <= 0.0) {
        return Err(Error::ZeroTensor);
    }
    let bounds = Bounds {
        lower: 0.0,
        upper: f64::INFINITY,
    };
    let out = projected_ascent(warm_start.entries().to_vec(), bounds, cfg, Some(GP_GAUGE_MEAN), |m| {
        gp_objective(m, data, actions, k)
    })?;
    if out.x.iter().all(|v| *v == 0.0) {
        return Err(Error::ZeroTensor);
    }
    Ok(FitReport {
        params: PreferenceTensor::new(k, out.x)?,
        iterations: out.iterations,
        grad_norm: out.grad_norm,
        objective: out.objective,
        converged: out.converged,
        next_step: out.next_step,
        trace: out.trace,
    })
}

/// Summed log-likelihood of `data` under `model`.
pub fn log_likelihood(model: &ModelParams, data: &PreferenceDataset, actions: &[Vec<f64>]) -> Result<f64> {
    check_inputs(data, actions, model.dim())?;
    let mut ll = 0.0;
    for r in data.records() {
        let (first, second) = if r.y { (r.a1, r.a2) } else { (r.a2, r.a1) };
        let p = model
            .preference_prob(&r.x, &actions[first], &actions[second])
            .map_err(|e| match e {
                Error::DegeneratePair { .. } => Error::DegeneratePair { a1: r.a1, a2: r.a2 },
                other => other,
            })?;
        ll += p.ln();
    }
    Ok(ll)
}

/// Argmax of the log-likelihood over an explicit finite model class; the
/// first candidate wins ties.
pub fn fit_enumerated(
    data: &PreferenceDataset,
    actions: &[Vec<f64>],
    candidates: &[ModelParams],
) -> Result<usize> {
    if candidates.is_empty() {
        return Err(Error::InvalidArgument("empty candidate class".into()));
    }
    let mut best = (0usize, f64::NEG_INFINITY);
    for (i, c) in candidates.iter().enumerate() {
        let ll = log_likelihood(c, data, actions)?;
        if ll > best.1 || (i == 0 && ll == f64::NEG_INFINITY) {
            best = (i, ll);
        }
    }
    Ok(best.0)
}
