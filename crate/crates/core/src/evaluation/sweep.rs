use rayon::prelude::*;

use super::Validation;
use crate::error::Result;
use crate::estimator::{optimize, CalibrationParams, SolverConfig};
use crate::geom::Pose;
use crate::infogain::{predict_information_gain, InfoState};
use crate::sensing::{CameraIntrinsics, CandidateSet, MeasurementSet, TargetBoard};

/// Predicted gain of one candidate next to what actually happened when it
/// was measured.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CandidateOutcome {
    pub index: usize,
    pub predicted_gain: f64,
    /// Validation RMSE before adding the view, px.
    pub rmse_before: f64,
    /// Validation RMSE after adding the view and re-optimizing, px.
    pub rmse_after: f64,
}

impl CandidateOutcome {
    pub fn rmse_reduction(&self) -> f64 {
        self.rmse_before - self.rmse_after
    }
}

/// Scores every candidate from the current state, then measures each one in
/// turn (independently of the others), re-optimizes and records the change
/// in validation RMSE.
#[allow(clippy::too_many_arguments)]
pub fn candidate_outcomes(
    theta: &CalibrationParams,
    sets: &[MeasurementSet],
    candidates: &CandidateSet,
    board: &TargetBoard,
    k: &CameraIntrinsics,
    solver: &SolverConfig,
    validation: &Validation,
    measure: &(dyn Fn(usize, &Pose) -> Result<MeasurementSet> + Sync),
) -> Result<Vec<CandidateOutcome>> {
    let info = InfoState::from_sets(theta, sets, board, k, 1.0)?;
    let before = validation.metrics(theta, None, board, k)?.e_rmse_px;
    (0..candidates.len())
        .into_par_iter()
        .map(|i| {
            let score = predict_information_gain(theta, &info, candidates, i, board, k)?;
            let pose = candidates.get(i).expect("index in range");
            let mut all = sets.to_vec();
            all.push(measure(i, pose)?);
            let solve = optimize(theta, &all, board, k, solver)?;
            let after = validation.metrics(&solve.params, None, board, k)?.e_rmse_px;
            Ok(CandidateOutcome {
                index: i,
                predicted_gain: score.information_gain,
                rmse_before: before,
                rmse_after: after,
            })
        })
        .collect()
}
