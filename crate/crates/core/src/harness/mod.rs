//! Configuration, seeding, experiment orchestration and CSV persistence.
//!
//! Runs are scheduled on the rayon pool and collected before anything is
//! written, so row order is always `(learner, seed, t)` regardless of which
//! run finished first.

mod config;
mod output;
mod runner;
mod stats;

pub use crate::seeding::{seed_split, SeedRole};
pub use config::{
    ExperimentConfig, FixedPointSection, InstanceSection, LearnerSection, Mode, OptimizerSection, RunSection,
    OUTPUT_DIR_ENV,
};
pub use output::{
    context_hash, write_offline, write_online, write_sweep, Written, OFFLINE_RAW_HEADER, OFFLINE_SUMMARY_HEADER,
    ONLINE_RAW_HEADER, ONLINE_SUMMARY_HEADER,
};
pub use runner::{
    config_hash, eval_seed, run_eta_sweep, run_offline_experiment, run_online_experiment, run_seed,
    summarize_offline, summarize_online, OfflineResults, OfflineRow, OfflineSummaryRow, OnlineResults, RunOutput,
    SummaryRow, SweepResults,
};
pub use stats::{loglog_slope, mean, sample_std};
