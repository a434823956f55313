//! Training orchestration and the measurements run on top of it: stationarity
//! traces, fixed-vs-trainable comparisons, the Hadamard comparison and the
//! label-permutation study.

mod config;
pub mod report;
mod runner;
mod stationarity;

pub use config::{DatasetSpec, HeadKind, RunConfig, DEFAULT_BATCH_SIZE, DEFAULT_DELTA_THRESHOLD};
pub use runner::{
    exchangeability_experiment, exchangeability_with_permutations, hadamard_comparison, train_run,
    train_run_with_network, ComparisonReport, ExchangeabilityReport, RunResult, SpreadStats,
};
pub use stationarity::{
    angular_deviation, class_feature_means, stationarity_snapshot, ClassMean, Snapshot,
    StationarityTrace,
};
