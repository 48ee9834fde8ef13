//! Parameter uncertainty from the Fisher information and greedy next-best-view
//! selection by predicted entropy reduction.

mod active;
mod entropy;
mod gain;

pub use active::{
    run_active_calibration, ActiveReport, ActiveSetup, IterationRecord, NbvConfig, NbvSelector,
    SelectionContext, SimulatedRobot, StopReason, ViewSelector, ViewSource,
};
pub use entropy::{fim_covariance, unit_entropy, InfoState, MAX_CONDITION};
pub use gain::{
    candidate_information, predict_information_gain, predicted_measurement, score_candidates,
    select_nbv, CandidateScore,
};
