use nalgebra::{Vector2, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{project, CameraIntrinsics, MeasurementSet, NoiseModel, PixelObservation, TargetBoard};
use crate::error::{Error, Result};
use crate::estimator::CalibrationParams;
use crate::geom::{Pose, Twist};

/// Minimum number of markers a usable measurement must contain.
pub const MIN_MARKERS: usize = 4;

/// Ground-truth workcell: camera, board, the true calibration and the noise
/// the simulated robot and camera inject.
#[derive(Clone, Debug, PartialEq)]
pub struct Scene {
    pub intrinsics: CameraIntrinsics,
    pub board: TargetBoard,
    pub truth: CalibrationParams,
    pub noise: NoiseModel,
}

/// Projects every board point through `T_cw`. `None` marks a point behind the
/// camera or outside the image.
pub fn visible_projections(
    k: &CameraIntrinsics,
    board: &TargetBoard,
    camera_from_world: &Pose,
) -> Vec<Option<Vector2<f64>>> {
    board
        .points()
        .iter()
        .map(|p| {
            project(k, &camera_from_world.act(p))
                .ok()
                .filter(|uv| k.contains(uv))
        })
        .collect()
}

impl Scene {
    /// 4x4 board with 30 mm pitch, default intrinsics and the default
    /// ground-truth calibration.
    pub fn default_workcell(noise: NoiseModel) -> Scene {
        Scene {
            intrinsics: CameraIntrinsics::default(),
            board: super::make_board(4, 4, 0.03).expect("valid default board"),
            truth: CalibrationParams::default_truth(),
            noise,
        }
    }

    /// Robot pose `T_eb` that puts the camera at `T_cw` under the true
    /// calibration.
    pub fn robot_pose_for_camera(&self, camera_from_world: &Pose) -> Pose {
        self.truth.robot_pose_for_camera(camera_from_world)
    }

    pub fn camera_from_world(&self, robot_pose: &Pose) -> Pose {
        self.truth.camera_from_world(robot_pose)
    }

    /// True when every marker projects inside the image from `robot_pose`.
    pub fn fully_visible(&self, robot_pose: &Pose) -> bool {
        visible_projections(&self.intrinsics, &self.board, &self.camera_from_world(robot_pose))
            .iter()
            .all(Option::is_some)
    }

    /// Noiseless projections of all markers from `robot_pose`.
    pub fn exact_observations(&self, robot_pose: &Pose) -> Result<Vec<PixelObservation>> {
        let t_cw = self.camera_from_world(robot_pose);
        self.board
            .points()
            .iter()
            .enumerate()
            .map(|(id, p)| {
                let uv = project(&self.intrinsics, &t_cw.act(p))?;
                Ok(PixelObservation {
                    marker_id: id,
                    u: uv.x,
                    v: uv.y,
                })
            })
            .collect()
    }
}

/// Generator for one named random stream of a seeded run. Streams of the same
/// seed are independent of each other.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Simulates one capture from the commanded pose, deterministic in `seed`.
pub fn simulate_measurement(scene: &Scene, commanded: &Pose, seed: u64) -> Result<MeasurementSet> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    simulate_measurement_with(scene, commanded, &mut rng)
}

/// Like [`simulate_measurement`] but draws from a caller-owned generator.
///
/// Pixel noise is drawn for every marker, then the robot pose noise, so the
/// number of draws does not depend on the noise magnitudes.
pub fn simulate_measurement_with<R: Rng + ?Sized>(
    scene: &Scene,
    commanded: &Pose,
    rng: &mut R,
) -> Result<MeasurementSet> {
    let noise = &scene.noise;
    let t_cw = scene.camera_from_world(commanded);
    let mut observations = Vec::with_capacity(scene.board.len());
    for (id, p) in scene.board.points().iter().enumerate() {
        let du: f64 = rng.sample(StandardNormal);
        let dv: f64 = rng.sample(StandardNormal);
        let Ok(uv) = project(&scene.intrinsics, &t_cw.act(p)) else {
            continue;
        };
        let noisy = uv + Vector2::new(du, dv) * noise.pixel_sigma;
        if scene.intrinsics.contains(&noisy) {
            observations.push(PixelObservation {
                marker_id: id,
                u: noisy.x,
                v: noisy.y,
            });
        }
    }
    let mut draw3 = |sigma: f64| {
        let v = Vector3::new(
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
        );
        v * sigma
    };
    let rho = draw3(noise.robot_trans_sigma);
    let phi = draw3(noise.robot_rot_sigma);
    let reported = if noise.robot_trans_sigma > 0.0 || noise.robot_rot_sigma > 0.0 {
        commanded.perturbed(&Twist::new(rho, phi))
    } else {
        *commanded
    };
    if observations.len() < MIN_MARKERS {
        return Err(Error::MarkerOutOfView {
            visible: observations.len(),
        });
    }
    MeasurementSet::new(reported, observations)
}
