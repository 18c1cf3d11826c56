//! Monte Carlo estimators built on sampled batches.

mod entropy;
mod multilevel;
mod stats;
mod tail;

pub use entropy::{entropy_1d, MIN_ENTROPY_SAMPLES};
pub use multilevel::{
    multilevel_volume, multilevel_volume_refined, LevelRatio, LevelSampler, LevelSchedule,
    VolumeEstimate,
};
pub use stats::{
    batch_means, mean, sample_variance, z_score, CompensatedSum, EstimateCI, DEFAULT_CONFIDENCE,
};
pub use tail::{
    check_removal_bound, exact_removal_lhs, min_distance_cdf, min_distance_threshold,
    prob_distance_below, prob_pair_below, removal_rhs, sweep_csv, RemovalBoundReport, SweepRow,
    DEFAULT_MIN_DISTANCE_EXPONENT,
};
