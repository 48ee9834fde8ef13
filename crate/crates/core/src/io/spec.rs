use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::CalibrationParams;
use crate::geom::{Pose, Rotation};
use crate::sensing::{make_board, CandidateGeometry, TargetBoard};

/// Allowed deviation of a stored quaternion from unit norm.
pub const QUATERNION_TOLERANCE: f64 = 1e-6;

/// A rigid transform as a unit quaternion `[w, x, y, z]` plus a translation
/// in meters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoseSpec {
    pub quaternion: [f64; 4],
    pub translation: [f64; 3],
}

impl PoseSpec {
    pub fn from_pose(p: &Pose) -> Self {
        PoseSpec {
            quaternion: p.rotation.to_quaternion(),
            translation: p.translation.into(),
        }
    }

    /// Checks the quaternion norm; `what` names the pose in the error.
    pub fn to_pose(&self, what: &str) -> Result<Pose> {
        let q = self.quaternion;
        let norm = q.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm.is_nan() || (norm - 1.0).abs() > QUATERNION_TOLERANCE || self.translation.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvariantViolation(format!(
                "{what}: quaternion norm {norm} is not 1 (or translation is not finite)"
            )));
        }
        Ok(Pose::new(Rotation::from_quaternion(q), self.translation.into()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoardSpec {
    pub rows: usize,
    pub cols: usize,
    /// Marker pitch, m.
    pub spacing: f64,
}

impl BoardSpec {
    pub fn build(&self) -> Result<TargetBoard> {
        make_board(self.rows, self.cols, self.spacing)
    }

    pub fn of(board: &TargetBoard) -> Self {
        BoardSpec {
            rows: board.rows,
            cols: board.cols,
            spacing: board.spacing,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationSpec {
    pub t_ce: PoseSpec,
    pub t_bw: PoseSpec,
}

impl CalibrationSpec {
    pub fn of(p: &CalibrationParams) -> Self {
        CalibrationSpec {
            t_ce: PoseSpec::from_pose(&p.t_ce),
            t_bw: PoseSpec::from_pose(&p.t_bw),
        }
    }

    pub fn build(&self) -> Result<CalibrationParams> {
        Ok(CalibrationParams::new(self.t_ce.to_pose("t_ce")?, self.t_bw.to_pose("t_bw")?))
    }
}

/// Candidate sampling pattern with angles in degrees.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySpec {
    pub radius_min_m: f64,
    pub radius_max_m: f64,
    pub radius_count: usize,
    pub azimuth_count: usize,
    pub azimuth_offset_deg: f64,
    pub elevation_min_deg: f64,
    pub elevation_max_deg: f64,
    pub elevation_count: usize,
}

impl GeometrySpec {
    pub fn of(g: &CandidateGeometry) -> Self {
        GeometrySpec {
            radius_min_m: g.radius_min,
            radius_max_m: g.radius_max,
            radius_count: g.radius_count,
            azimuth_count: g.azimuth_count,
            azimuth_offset_deg: g.azimuth_offset.to_degrees(),
            elevation_min_deg: g.elevation_min.to_degrees(),
            elevation_max_deg: g.elevation_max.to_degrees(),
            elevation_count: g.elevation_count,
        }
    }

    pub fn build(&self) -> Result<CandidateGeometry> {
        let g = CandidateGeometry {
            radius_min: self.radius_min_m,
            radius_max: self.radius_max_m,
            radius_count: self.radius_count,
            azimuth_count: self.azimuth_count,
            azimuth_offset: self.azimuth_offset_deg.to_radians(),
            elevation_min: self.elevation_min_deg.to_radians(),
            elevation_max: self.elevation_max_deg.to_radians(),
            elevation_count: self.elevation_count,
        };
        g.validate()?;
        Ok(g)
    }
}
