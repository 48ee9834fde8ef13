use rayon::prelude::*;

use super::InfoState;
use crate::error::{Error, Result};
use crate::estimator::{jacobian_block, CalibrationParams, Matrix12};
use crate::geom::Pose;
use crate::sensing::{
    visible_projections, CameraIntrinsics, CandidateSet, MeasurementSet, PixelObservation,
    TargetBoard, MIN_MARKERS,
};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CandidateScore {
    pub index: usize,
    /// Entropy after hypothetically adding the candidate's view, nats.
    pub predicted_entropy: f64,
    /// `current entropy - predicted_entropy`, nats.
    pub information_gain: f64,
}

/// Noiseless measurement the candidate robot pose would produce if `theta`
/// were the true calibration. Markers outside the image are left out.
pub fn predicted_measurement(
    theta: &CalibrationParams,
    robot_pose: &Pose,
    board: &TargetBoard,
    k: &CameraIntrinsics,
) -> Result<MeasurementSet> {
    let t_cw = theta.camera_from_world(robot_pose);
    let observations: Vec<PixelObservation> = visible_projections(k, board, &t_cw)
        .into_iter()
        .enumerate()
        .filter_map(|(id, uv)| {
            uv.map(|uv| PixelObservation {
                marker_id: id,
                u: uv.x,
                v: uv.y,
            })
        })
        .collect();
    if observations.len() < MIN_MARKERS {
        return Err(Error::MarkerOutOfView {
            visible: observations.len(),
        });
    }
    MeasurementSet::new(*robot_pose, observations)
}

/// Information block `J_c^T J_c` a candidate view would contribute at `theta`.
pub fn candidate_information(
    theta: &CalibrationParams,
    robot_pose: &Pose,
    board: &TargetBoard,
    k: &CameraIntrinsics,
) -> Result<Matrix12> {
    let set = predicted_measurement(theta, robot_pose, board, k)?;
    Ok(jacobian_block(theta, &set, board, k)?.information())
}

/// Expected entropy reduction from adding the view at candidate `index`,
/// predicted at the current estimate without moving the robot.
pub fn predict_information_gain(
    theta: &CalibrationParams,
    current: &InfoState,
    candidates: &CandidateSet,
    index: usize,
    board: &TargetBoard,
    k: &CameraIntrinsics,
) -> Result<CandidateScore> {
    let pose = candidates
        .get(index)
        .ok_or_else(|| Error::InvariantViolation(format!("candidate index {index} out of range")))?;
    let block = candidate_information(theta, pose, board, k).map_err(|e| match e {
        Error::MarkerOutOfView { visible } => Error::CandidateInvisible { index, visible },
        other => other,
    })?;
    let after = current.updated(&block)?;
    Ok(CandidateScore {
        index,
        predicted_entropy: after.entropy,
        information_gain: current.entropy - after.entropy,
    })
}

/// Scores every candidate not in `excluded` and returns the index with the
/// largest gain (lowest index on ties) together with all scores, in index
/// order. Candidates with too few visible markers are skipped.
pub fn select_nbv(
    theta: &CalibrationParams,
    current: &InfoState,
    candidates: &CandidateSet,
    excluded: &[usize],
    board: &TargetBoard,
    k: &CameraIntrinsics,
) -> Result<(usize, Vec<CandidateScore>)> {
    let eligible: Vec<usize> = (0..candidates.len())
        .filter(|i| !excluded.contains(i))
        .collect();
    score_candidates(theta, current, candidates, &eligible, board, k)
}

/// Like [`select_nbv`] over an explicit list of candidate indices.
pub fn score_candidates(
    theta: &CalibrationParams,
    current: &InfoState,
    candidates: &CandidateSet,
    indices: &[usize],
    board: &TargetBoard,
    k: &CameraIntrinsics,
) -> Result<(usize, Vec<CandidateScore>)> {
    let scored: Vec<Result<CandidateScore>> = indices
        .par_iter()
        .map(|&i| predict_information_gain(theta, current, candidates, i, board, k))
        .collect();
    let mut scores = Vec::with_capacity(scored.len());
    for s in scored {
        match s {
            Ok(s) => scores.push(s),
            Err(Error::CandidateInvisible { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    scores.sort_by_key(|s| s.index);
    let best = argmax(&scores).ok_or(Error::NoEvaluableCandidates)?;
    Ok((best, scores))
}

/// Index of the highest gain; the first one wins ties.
fn argmax(scores: &[CandidateScore]) -> Option<usize> {
    let mut best: Option<&CandidateScore> = None;
    for s in scores {
        if best.is_none_or(|b| s.information_gain > b.information_gain) {
            best = Some(s);
        }
    }
    best.map(|s| s.index)
}
