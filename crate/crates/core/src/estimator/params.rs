use nalgebra::{SVector, Vector3};

use crate::error::Result;
use crate::geom::{Pose, Rotation, Twist};

pub type Vector12 = SVector<f64, 12>;
pub type Matrix12 = nalgebra::SMatrix<f64, 12, 12>;

/// The unknowns of the calibration: `T_ce` (end-effector -> camera) and
/// `T_bw` (world -> robot base).
///
/// The tangent vector of this pair is `[xi_ce | xi_bw]`, each a twist in
/// `(rho, phi)` order.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CalibrationParams {
    pub t_ce: Pose,
    pub t_bw: Pose,
}

impl CalibrationParams {
    pub fn new(t_ce: Pose, t_bw: Pose) -> Self {
        CalibrationParams { t_ce, t_bw }
    }

    /// The workcell used by the default simulated scene: a camera offset a
    /// few centimeters from the flange and a board on the table in front of
    /// the robot.
    pub fn default_truth() -> Self {
        let t_ce = Pose::new(
            Rotation::from_axis_angle(&Vector3::new(0.2, -0.1, 1.0), 0.35),
            Vector3::new(0.045, -0.025, 0.06),
        );
        let t_bw = Pose::new(
            Rotation::from_axis_angle(&Vector3::new(0.05, 0.02, 1.0), 25f64.to_radians()),
            Vector3::new(0.55, 0.05, -0.1),
        );
        CalibrationParams { t_ce, t_bw }
    }

    /// `T_cw = T_ce * T_eb * T_bw`.
    pub fn camera_from_world(&self, robot_pose: &Pose) -> Pose {
        self.t_ce * *robot_pose * self.t_bw
    }

    /// The robot pose `T_eb` that realizes a given camera pose `T_cw`.
    pub fn robot_pose_for_camera(&self, camera_from_world: &Pose) -> Pose {
        self.t_ce.inverse() * *camera_from_world * self.t_bw.inverse()
    }

    /// Left-perturbs both transforms by the 12-vector `[xi_ce | xi_bw]`.
    pub fn perturbed(&self, delta: &Vector12) -> Self {
        let d_ce = Twist::from_slice(&delta.as_slice()[..6]);
        let d_bw = Twist::from_slice(&delta.as_slice()[6..]);
        CalibrationParams {
            t_ce: self.t_ce.perturbed(&d_ce),
            t_bw: self.t_bw.perturbed(&d_bw),
        }
    }

    /// Tangent vector `delta` with `reference.perturbed(delta) == self`.
    pub fn tangent_difference(&self, reference: &CalibrationParams) -> Result<Vector12> {
        let a = (self.t_ce * reference.t_ce.inverse()).log()?;
        let b = (self.t_bw * reference.t_bw.inverse()).log()?;
        let mut v = Vector12::zeros();
        v.fixed_rows_mut::<6>(0).copy_from(&a.0);
        v.fixed_rows_mut::<6>(6).copy_from(&b.0);
        Ok(v)
    }
}
