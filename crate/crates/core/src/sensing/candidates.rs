use std::f64::consts::TAU;

use nalgebra::{Matrix3, Vector3};

use super::Scene;
use crate::error::{Error, Result};
use crate::geom::{Pose, Rotation};

/// Spherical-cap sampling pattern for camera viewpoints around the board.
/// Angles are in radians, distances in meters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CandidateGeometry {
    pub radius_min: f64,
    pub radius_max: f64,
    pub radius_count: usize,
    pub azimuth_count: usize,
    pub azimuth_offset: f64,
    pub elevation_min: f64,
    pub elevation_max: f64,
    pub elevation_count: usize,
}

impl Default for CandidateGeometry {
    /// 2 radii x 8 azimuths x 3 elevations = 48 viewpoints.
    fn default() -> Self {
        CandidateGeometry {
            radius_min: 0.45,
            radius_max: 0.75,
            radius_count: 2,
            azimuth_count: 8,
            azimuth_offset: 0.0,
            elevation_min: 30f64.to_radians(),
            elevation_max: 70f64.to_radians(),
            elevation_count: 3,
        }
    }
}

impl CandidateGeometry {
    pub fn validate(&self) -> Result<()> {
        let counts_ok = self.radius_count > 0 && self.azimuth_count > 0 && self.elevation_count > 0;
        let ranges_ok = self.radius_min > 0.0
            && self.radius_max >= self.radius_min
            && self.elevation_max >= self.elevation_min
            && self.elevation_min > 0.0
            && self.elevation_max <= std::f64::consts::FRAC_PI_2;
        if counts_ok && ranges_ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("bad candidate geometry {self:?}")))
        }
    }

    pub fn radii(&self) -> Vec<f64> {
        linspace(self.radius_min, self.radius_max, self.radius_count)
    }

    pub fn elevations(&self) -> Vec<f64> {
        linspace(self.elevation_min, self.elevation_max, self.elevation_count)
    }

    pub fn azimuths(&self) -> Vec<f64> {
        (0..self.azimuth_count)
            .map(|i| self.azimuth_offset + TAU * i as f64 / self.azimuth_count as f64)
            .collect()
    }
}

/// Evenly spaced values including both ends; a single value sits in the middle.
fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![0.5 * (lo + hi)],
        _ => (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// Camera pose `T_cw` for a camera on a sphere of `radius` around `center`,
/// with its optical axis through `center`.
///
/// The camera x axis is kept horizontal, `(-sin az, cos az, 0)`, which fixes
/// the in-plane roll for every viewpoint including the top-down one.
pub fn camera_look_at(center: &Vector3<f64>, radius: f64, azimuth: f64, elevation: f64) -> Pose {
    let (sa, ca) = azimuth.sin_cos();
    let (se, ce) = elevation.sin_cos();
    let outward = Vector3::new(ce * ca, ce * sa, se);
    let position = center + radius * outward;
    let z = -outward;
    let x = Vector3::new(-sa, ca, 0.0);
    let y = z.cross(&x);
    let world_from_camera = Pose::new(
        Rotation::from_matrix_unchecked(Matrix3::from_columns(&[x, y, z])),
        position,
    );
    world_from_camera.inverse()
}

/// Candidate robot poses `T_eb`; a candidate's index is its position.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CandidateSet {
    pub poses: Vec<Pose>,
}

impl CandidateSet {
    pub fn new(poses: Vec<Pose>) -> Self {
        CandidateSet { poses }
    }

    pub fn len(&self) -> usize {
        self.poses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poses.is_empty()
    }

    pub fn get(&self, index: usize) -> Option<&Pose> {
        self.poses.get(index)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Pose> {
        self.poses.iter()
    }
}

/// Samples viewpoints on the configured spherical caps around the board
/// center, converts them to robot poses through the true calibration and
/// keeps those that see every marker.
///
/// Order: radius, then elevation, then azimuth (innermost).
pub fn generate_candidates(geometry: &CandidateGeometry, scene: &Scene) -> Result<CandidateSet> {
    geometry.validate()?;
    let center = Vector3::zeros();
    let mut poses = Vec::new();
    for r in geometry.radii() {
        for e in geometry.elevations() {
            for a in geometry.azimuths() {
                let robot = scene.robot_pose_for_camera(&camera_look_at(&center, r, a, e));
                if scene.fully_visible(&robot) {
                    poses.push(robot);
                }
            }
        }
    }
    if poses.is_empty() {
        return Err(Error::EmptyCandidateSet);
    }
    Ok(CandidateSet::new(poses))
}
