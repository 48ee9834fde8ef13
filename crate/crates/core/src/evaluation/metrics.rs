use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{residuals, solve_pnp, CalibrationParams};
use crate::geom::Pose;
use crate::sensing::{CameraIntrinsics, MeasurementSet, TargetBoard};

/// Error metrics of one estimate on a validation set. Absolute errors need
/// the ground truth and are `None` without it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub e_at_mm: Option<f64>,
    pub e_ar_deg: Option<f64>,
    pub e_rt_mm: f64,
    pub e_rr_deg: f64,
    /// Per-component reprojection RMSE, px.
    pub e_rmse_px: f64,
    /// Frame-normalized reprojection error, see [`Rmse::per_frame`].
    pub e_rmse_frame_px: f64,
}

/// `(translation mm, rotation deg)` of `estimated^-1 * truth`.
pub fn absolute_errors(estimated: &Pose, truth: &Pose) -> (f64, f64) {
    let delta = estimated.inverse() * *truth;
    (delta.translation.norm() * 1e3, delta.rotation_angle().to_degrees())
}

/// Loop-closure error `T_bw T_wc,k T_ce T_eb,k`, which is the identity for a
/// perfect calibration and noiseless poses.
pub fn loop_closure(theta: &CalibrationParams, camera_from_world: &Pose, robot_pose: &Pose) -> Pose {
    theta.t_bw * camera_from_world.inverse() * theta.t_ce * *robot_pose
}

/// Mean loop-closure `(translation mm, rotation deg)` over frames with a
/// camera pose; frames whose PnP failed are passed as `None` and skipped.
pub fn relative_errors_from_poses(
    theta: &CalibrationParams,
    camera_poses: &[Option<Pose>],
    robot_poses: &[Pose],
) -> Result<(f64, f64)> {
    if camera_poses.len() != robot_poses.len() {
        return Err(Error::InvariantViolation(format!(
            "{} camera poses but {} robot poses",
            camera_poses.len(),
            robot_poses.len()
        )));
    }
    let mut sum_t = 0.0;
    let mut sum_r = 0.0;
    let mut n = 0usize;
    for (cam, robot) in camera_poses.iter().zip(robot_poses) {
        let Some(cam) = cam else { continue };
        let d = loop_closure(theta, cam, robot);
        sum_t += d.translation.norm() * 1e3;
        sum_r += d.rotation_angle().to_degrees();
        n += 1;
    }
    if n == 0 {
        return Err(Error::InsufficientFrames { needed: 1, got: 0 });
    }
    Ok((sum_t / n as f64, sum_r / n as f64))
}

/// [`relative_errors_from_poses`] with camera poses from PnP on each set.
pub fn relative_errors(
    theta: &CalibrationParams,
    sets: &[MeasurementSet],
    board: &TargetBoard,
    k: &CameraIntrinsics,
) -> Result<(f64, f64)> {
    let cams: Vec<Option<Pose>> = sets
        .iter()
        .map(|s| solve_pnp(board, &s.observations, k).ok())
        .collect();
    let robots: Vec<Pose> = sets.iter().map(|s| s.robot_pose).collect();
    relative_errors_from_poses(theta, &cams, &robots)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rmse {
    /// `sqrt(sum over frames and markers of |r|^2 / (K - 1))`. Grows with the
    /// number of markers per frame.
    pub per_frame: f64,
    /// `sqrt(sum |r|^2 / (2 N))` over the `N` observed markers; estimates
    /// the per-axis pixel noise.
    pub per_component: f64,
}

/// Reprojection error of `theta` over `K >= 2` validation sets.
pub fn reprojection_rmse(
    theta: &CalibrationParams,
    sets: &[MeasurementSet],
    board: &TargetBoard,
    k: &CameraIntrinsics,
) -> Result<Rmse> {
    if sets.len() < 2 {
        return Err(Error::InsufficientFrames {
            needed: 2,
            got: sets.len(),
        });
    }
    let mut sum = 0.0;
    let mut count = 0usize;
    for s in sets {
        sum += residuals(theta, s, board, k)?.squared_norm();
        count += s.len();
    }
    Ok(rmse_from_sums(sum, sets.len(), count))
}

fn rmse_from_sums(sum: f64, frames: usize, observations: usize) -> Rmse {
    Rmse {
        per_frame: (sum / (frames - 1) as f64).sqrt(),
        per_component: (sum / (2 * observations) as f64).sqrt(),
    }
}

/// Held-out measurement sets with their PnP camera poses computed once.
#[derive(Clone, Debug)]
pub struct Validation {
    pub sets: Vec<MeasurementSet>,
    pub camera_poses: Vec<Option<Pose>>,
}

impl Validation {
    pub fn new(sets: Vec<MeasurementSet>, board: &TargetBoard, k: &CameraIntrinsics) -> Result<Self> {
        if sets.len() < 2 {
            return Err(Error::InsufficientFrames {
                needed: 2,
                got: sets.len(),
            });
        }
        let camera_poses = sets
            .iter()
            .map(|s| solve_pnp(board, &s.observations, k).ok())
            .collect();
        Ok(Validation { sets, camera_poses })
    }

    pub fn metrics(
        &self,
        theta: &CalibrationParams,
        truth: Option<&CalibrationParams>,
        board: &TargetBoard,
        k: &CameraIntrinsics,
    ) -> Result<MetricsRecord> {
        let robots: Vec<Pose> = self.sets.iter().map(|s| s.robot_pose).collect();
        let (e_rt_mm, e_rr_deg) = relative_errors_from_poses(theta, &self.camera_poses, &robots)?;
        let rmse = reprojection_rmse(theta, &self.sets, board, k)?;
        let abs = truth.map(|t| absolute_errors(&theta.t_ce, &t.t_ce));
        Ok(MetricsRecord {
            e_at_mm: abs.map(|a| a.0),
            e_ar_deg: abs.map(|a| a.1),
            e_rt_mm,
            e_rr_deg,
            e_rmse_px: rmse.per_component,
            e_rmse_frame_px: rmse.per_frame,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Rotation;
    use crate::sensing::{camera_look_at, simulate_measurement, NoiseModel, Scene};
    use approx::assert_relative_eq;
    use nalgebra::Vector3;
    use proptest::prelude::*;

    fn pose(axis: (f64, f64, f64), angle: f64, t: (f64, f64, f64)) -> Pose {
        Pose::new(
            Rotation::from_axis_angle(&Vector3::new(axis.0, axis.1, axis.2), angle),
            Vector3::new(t.0, t.1, t.2),
        )
    }

    fn views(scene: &Scene, n: usize, seed: u64) -> Vec<MeasurementSet> {
        (0..n)
            .map(|i| {
                let a = i as f64 * 0.7;
                let cam = camera_look_at(&Vector3::zeros(), 0.5 + 0.02 * i as f64, a, 0.9 + 0.05 * i as f64);
                simulate_measurement(scene, &scene.robot_pose_for_camera(&cam), seed + i as u64).unwrap()
            })
            .collect()
    }

    #[test]
    fn absolute_errors_three_four_five() {
        let gt = pose((0.3, 0.1, 0.2), 0.4, (0.1, 0.2, 0.3));
        assert_eq!(absolute_errors(&gt, &gt), (0.0, 0.0));
        let delta = pose((0.0, 0.0, 1.0), std::f64::consts::FRAC_PI_2, (0.003, 0.004, 0.0));
        let (t, r) = absolute_errors(&gt, &(gt * delta));
        assert_relative_eq!(t, 5.0, epsilon = 1e-9);
        assert_relative_eq!(r, 90.0, epsilon = 1e-9);
    }

    proptest! {
        #[test]
        fn absolute_errors_symmetric_and_left_invariant(
            a in (-1.0f64..1.0, -1.0f64..1.0, 0.1f64..1.0, 0.0f64..3.0),
            b in (-1.0f64..1.0, -1.0f64..1.0, 0.1f64..1.0, 0.0f64..3.0),
            c in (-1.0f64..1.0, 0.1f64..1.0, 0.0f64..3.0),
        ) {
            let x = pose((a.0, a.1, a.2), a.3, (a.0, a.1, a.2));
            let y = pose((b.0, b.1, b.2), b.3, (b.2, b.0, b.1));
            let z = pose((c.0, c.1, 1.0), c.2, (c.1, c.0, c.1));
            let (t1, r1) = absolute_errors(&x, &y);
            let (t2, r2) = absolute_errors(&y, &x);
            prop_assert!((t1 - t2).abs() < 1e-9 && (r1 - r2).abs() < 1e-7);
            let (t3, r3) = absolute_errors(&(z * x), &(z * y));
            prop_assert!((t1 - t3).abs() < 1e-9 && (r1 - r3).abs() < 1e-7);
            prop_assert!(t1 >= 0.0 && r1 >= 0.0);
        }
    }

    #[test]
    fn relative_errors_vanish_at_truth() {
        let scene = Scene::default_workcell(NoiseModel::noiseless());
        let sets = views(&scene, 6, 0);
        let (t, r) = relative_errors(&scene.truth, &sets, &scene.board, &scene.intrinsics).unwrap();
        assert!(t < 1e-9 && r < 1e-9, "{t} {r}");
    }

    #[test]
    fn camera_offset_bounds_relative_error() {
        let scene = Scene::default_workcell(NoiseModel::noiseless());
        let sets = views(&scene, 6, 0);
        let mut theta = scene.truth;
        theta.t_ce = Pose::from_translation(Vector3::new(0.002, 0.0, 0.0)) * theta.t_ce;
        let (t, _) = relative_errors(&theta, &sets, &scene.board, &scene.intrinsics).unwrap();
        assert!(t > 0.0 && t <= 2.0 + 1e-9, "{t}");
    }

    #[test]
    fn relative_errors_match_straight_line_oracle() {
        let scene = Scene::default_workcell(NoiseModel::default());
        let sets = views(&scene, 10, 7);
        let mut theta = scene.truth;
        theta.t_bw = Pose::from_translation(Vector3::new(0.001, -0.002, 0.0005)) * theta.t_bw;
        let got = relative_errors(&theta, &sets, &scene.board, &scene.intrinsics).unwrap();

        let (mut st, mut sr) = (0.0, 0.0);
        for s in &sets {
            let t_wc = solve_pnp(&scene.board, &s.observations, &scene.intrinsics).unwrap().inverse();
            let d = theta.t_bw * t_wc * theta.t_ce * s.robot_pose;
            st += d.translation.norm() * 1e3;
            sr += d.rotation_angle().to_degrees();
        }
        assert_eq!(got, (st / 10.0, sr / 10.0));

        // the same chain as 4x4 matrices
        let (mut mt, mut mr) = (0.0, 0.0);
        for s in &sets {
            let t_wc = solve_pnp(&scene.board, &s.observations, &scene.intrinsics).unwrap().inverse();
            let m = theta.t_bw.to_homogeneous()
                * t_wc.to_homogeneous()
                * theta.t_ce.to_homogeneous()
                * s.robot_pose.to_homogeneous();
            mt += m.fixed_view::<3, 1>(0, 3).norm() * 1e3;
            let tr = m.fixed_view::<3, 3>(0, 0).trace();
            mr += ((tr - 1.0) / 2.0).clamp(-1.0, 1.0).acos().to_degrees();
        }
        assert_relative_eq!(got.0, mt / 10.0, epsilon = 1e-9);
        assert_relative_eq!(got.1, mr / 10.0, epsilon = 1e-6);
    }

    #[test]
    fn all_frames_failing_is_an_error() {
        let theta = CalibrationParams::default_truth();
        assert!(relative_errors_from_poses(&theta, &[None, None], &[Pose::identity(); 2]).is_err());
    }

    #[test]
    fn literal_rmse_arithmetic() {
        // two frames with a single marker each, residual norms 3 and 4 px
        let r = rmse_from_sums(9.0 + 16.0, 2, 2);
        assert_relative_eq!(r.per_frame, 5.0);
        assert_relative_eq!(r.per_component, (25.0f64 / 4.0).sqrt());
    }

    #[test]
    fn rmse_zero_at_truth_and_needs_two_frames() {
        let scene = Scene::default_workcell(NoiseModel::noiseless());
        let sets = views(&scene, 3, 0);
        let r = reprojection_rmse(&scene.truth, &sets, &scene.board, &scene.intrinsics).unwrap();
        assert!(r.per_frame < 1e-9 && r.per_component < 1e-9);
        assert!(matches!(
            reprojection_rmse(&scene.truth, &sets[..1], &scene.board, &scene.intrinsics),
            Err(Error::InsufficientFrames { needed: 2, got: 1 })
        ));
    }

    #[test]
    fn literal_rmse_scales_with_marker_count() {
        let scene = Scene::default_workcell(NoiseModel::pixel_only(0.5));
        let expected = 0.5 * 32f64.sqrt();
        let mut mean = 0.0;
        for seed in 0..50 {
            let sets = views(&scene, 10, 1000 * seed);
            let r = reprojection_rmse(&scene.truth, &sets, &scene.board, &scene.intrinsics).unwrap();
            assert!((0.8 * expected..=1.2 * expected).contains(&r.per_frame), "{}", r.per_frame);
            assert!((0.4..0.6).contains(&r.per_component));
            mean += r.per_component / 50.0;
        }
        assert!((mean - 0.5).abs() < 0.01, "{mean}");
    }

    #[test]
    fn validation_metrics() {
        let scene = Scene::default_workcell(NoiseModel::noiseless());
        let v = Validation::new(views(&scene, 4, 0), &scene.board, &scene.intrinsics).unwrap();
        let m = v.metrics(&scene.truth, Some(&scene.truth), &scene.board, &scene.intrinsics).unwrap();
        assert_eq!((m.e_at_mm, m.e_ar_deg), (Some(0.0), Some(0.0)));
        assert!(m.e_rt_mm < 1e-9 && m.e_rmse_px < 1e-9);
        let m = v.metrics(&scene.truth, None, &scene.board, &scene.intrinsics).unwrap();
        assert_eq!(m.e_at_mm, None);
    }
}
