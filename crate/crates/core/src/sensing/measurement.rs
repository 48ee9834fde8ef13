use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Pose;

/// One detected marker.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PixelObservation {
    pub marker_id: usize,
    pub u: f64,
    pub v: f64,
}

impl PixelObservation {
    pub fn uv(&self) -> Vector2<f64> {
        Vector2::new(self.u, self.v)
    }
}

/// A reported robot pose `T_eb` (base -> end-effector) plus the marker
/// detections taken from it.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementSet {
    pub robot_pose: Pose,
    pub observations: Vec<PixelObservation>,
}

impl MeasurementSet {
    /// Sorts observations by marker id and checks the set is non-empty with
    /// no duplicated ids.
    pub fn new(robot_pose: Pose, mut observations: Vec<PixelObservation>) -> Result<Self> {
        if observations.is_empty() {
            return Err(Error::InvariantViolation("measurement set has no observations".into()));
        }
        observations.sort_by_key(|o| o.marker_id);
        if let Some(w) = observations.windows(2).find(|w| w[0].marker_id == w[1].marker_id) {
            return Err(Error::InvariantViolation(format!(
                "marker {} observed twice in one measurement set",
                w[0].marker_id
            )));
        }
        Ok(MeasurementSet {
            robot_pose,
            observations,
        })
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }
}

/// Gaussian noise injected by the simulator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseModel {
    /// Isotropic pixel noise, px.
    #[serde(rename = "pixel_sigma_px")]
    pub pixel_sigma: f64,
    /// Per-axis rotation noise on the reported robot pose, rad.
    #[serde(rename = "robot_rot_sigma_rad")]
    pub robot_rot_sigma: f64,
    /// Per-axis translation noise on the reported robot pose, m.
    #[serde(rename = "robot_trans_sigma_m")]
    pub robot_trans_sigma: f64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel {
            pixel_sigma: 0.5,
            robot_rot_sigma: 0.05f64.to_radians(),
            robot_trans_sigma: 1e-4,
        }
    }
}

impl NoiseModel {
    pub fn noiseless() -> Self {
        NoiseModel {
            pixel_sigma: 0.0,
            robot_rot_sigma: 0.0,
            robot_trans_sigma: 0.0,
        }
    }

    pub fn pixel_only(pixel_sigma: f64) -> Self {
        NoiseModel {
            pixel_sigma,
            ..Self::noiseless()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.pixel_sigma, self.robot_rot_sigma, self.robot_trans_sigma];
        if all.iter().all(|s| *s >= 0.0 && s.is_finite()) {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("noise sigmas must be >= 0: {self:?}")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn obs(id: usize) -> PixelObservation {
        PixelObservation {
            marker_id: id,
            u: 1.0,
            v: 2.0,
        }
    }

    #[test]
    fn sorted_and_validated() {
        let set = MeasurementSet::new(Pose::identity(), vec![obs(3), obs(0), obs(2)]).unwrap();
        let ids: Vec<_> = set.observations.iter().map(|o| o.marker_id).collect();
        assert_eq!(ids, vec![0, 2, 3]);
        assert!(MeasurementSet::new(Pose::identity(), vec![]).is_err());
        assert!(MeasurementSet::new(Pose::identity(), vec![obs(1), obs(1)]).is_err());
    }

    #[test]
    fn noise_validation() {
        assert!(NoiseModel::default().validate().is_ok());
        assert!(NoiseModel::pixel_only(-1.0).validate().is_err());
    }
}
