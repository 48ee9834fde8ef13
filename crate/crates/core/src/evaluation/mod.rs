//! Baseline view-selection policies and the error metrics used to compare
//! calibrations.

mod metrics;
mod policy;
mod stats;
mod sweep;

pub use metrics::{
    absolute_errors, loop_closure, relative_errors, relative_errors_from_poses, reprojection_rmse,
    MetricsRecord, Rmse, Validation,
};
pub use policy::{
    end_effector_position, farthest_position, policy_max_distance, policy_random, DistanceRule,
    MaxDistanceSelector, Policy, RandomSelector,
};
pub use stats::{mean_std, pearson_correlation};
pub use sweep::{candidate_outcomes, CandidateOutcome};
