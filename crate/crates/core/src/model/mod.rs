//! Ground-truth and estimated preference models, Gibbs policies, best
//! responses and the Nash-equilibrium oracle.

mod distribution;
mod game;
mod instance;
mod params;

pub use distribution::{ActionDistribution, MASS_TOLERANCE};
pub use game::{
    best_response_max, best_response_min, gibbs_policy, log_partition, nash_fixed_point,
    regularized_value, FixedPointConfig, NashSolution, PreferenceMatrix,
};
pub use instance::{ContextDistribution, Instance, InstanceSpec};
pub use params::{ModelParams, ModelVariant, PreferenceTensor, RewardMatrix};
