//! Maximum-likelihood fitting of tensor and reward-matrix models from
//! preference data, plus the Gram-matrix bonus used by the optimism baseline.

mod data;
mod fit;
mod gram;
mod state;

pub use data::{PreferenceDataset, PreferenceRecord};
pub use fit::{fit_bt_mle, fit_enumerated, fit_gp_mle, log_likelihood, FitReport, OptimizerConfig};
pub use gram::{feature, reference_feature_mean, GramState, DEFAULT_RIDGE, REFERENCE_MEAN_SAMPLES};
pub use state::{EstimatorState, OptimizerScratch, GP_INITIAL_ENTRY};
