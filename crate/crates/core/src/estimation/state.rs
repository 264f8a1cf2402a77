use crate::error::Result;
use crate::estimation::data::PreferenceDataset;
use crate::estimation::fit::{fit_bt_mle, fit_gp_mle, OptimizerConfig};
use crate::estimation::gram::GramState;
use crate::model::{Instance, ModelParams, ModelVariant, PreferenceTensor, RewardMatrix};

/// Initial entry of every tensor coordinate before the first fit. A constant
/// tensor predicts `1/2` on every pair, matching the `π0` start.
pub const GP_INITIAL_ENTRY: f64 = 0.5;

/// Warm-start bookkeeping carried between refits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerScratch {
    pub step: f64,
    pub iterations: usize,
    pub last_grad_norm: f64,
}

impl Default for OptimizerScratch {
    fn default() -> Self {
        Self {
            step: 1.0,
            iterations: 0,
            last_grad_norm: f64::NAN,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorState {
    pub params: ModelParams,
    pub scratch: OptimizerScratch,
    /// Present for the bonus-optimism learner only.
    pub gram: Option<GramState>,
    /// Records the current `params` were fitted on; zero before the first fit.
    pub fitted_on: usize,
}

impl EstimatorState {
    /// Uninformative start: constant tensor (GP) or the zero matrix (BT).
    pub fn initial(instance: &Instance, gram: Option<GramState>) -> Self {
        let k = instance.dim();
        let params = match instance.variant() {
            ModelVariant::Gp => ModelParams::Gp(PreferenceTensor::constant(k, GP_INITIAL_ENTRY)),
            ModelVariant::Bt => ModelParams::Bt(RewardMatrix::zeros(k)),
        };
        Self::from_params(params, gram)
    }

    pub fn from_params(params: ModelParams, gram: Option<GramState>) -> Self {
        Self {
            params,
            scratch: OptimizerScratch::default(),
            gram,
            fitted_on: 0,
        }
    }

    pub fn is_fitted(&self) -> bool {
        self.fitted_on > 0
    }

    /// Refits on all of `data`, warm-started from the current estimate.
    pub fn refit(&mut self, data: &PreferenceDataset, instance: &Instance, cfg: &OptimizerConfig) -> Result<()> {
        let cfg = OptimizerConfig {
            initial_step: self.scratch.step,
            ..*cfg
        };
        let actions = instance.actions();
        let (params, iterations, grad_norm, next_step) = match &self.params {
            ModelParams::Gp(m) => {
                let fit = fit_gp_mle(data, actions, m, &cfg)?;
                (ModelParams::Gp(fit.params), fit.iterations, fit.grad_norm, fit.next_step)
            }
            ModelParams::Bt(w) => {
                let fit = fit_bt_mle(data, actions, w, instance.reward_scale(), &cfg)?;
                (ModelParams::Bt(fit.params), fit.iterations, fit.grad_norm, fit.next_step)
            }
        };
        self.params = params;
        self.scratch = OptimizerScratch {
            step: next_step,
            iterations,
            last_grad_norm: grad_norm,
        };
        self.fitted_on = data.len();
        Ok(())
    }
}
