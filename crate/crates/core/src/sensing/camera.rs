use nalgebra::{Matrix2x3, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Points closer than this to the camera plane cannot be projected.
pub const MIN_DEPTH: f64 = 1e-9;

/// Pinhole intrinsics without distortion, in pixels.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraIntrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: f64,
    pub height: f64,
}

impl Default for CameraIntrinsics {
    /// 1280x1024 sensor, 1100 px focal length, centered principal point.
    fn default() -> Self {
        CameraIntrinsics {
            fx: 1100.0,
            fy: 1100.0,
            cx: 640.0,
            cy: 512.0,
            width: 1280.0,
            height: 1024.0,
        }
    }
}

impl CameraIntrinsics {
    pub fn validate(&self) -> Result<()> {
        let ok = self.fx > 0.0
            && self.fy > 0.0
            && self.cx > 0.0
            && self.cx < self.width
            && self.cy > 0.0
            && self.cy < self.height;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("invalid camera intrinsics {self:?}")))
        }
    }

    pub fn contains(&self, uv: &Vector2<f64>) -> bool {
        uv.x >= 0.0 && uv.x < self.width && uv.y >= 0.0 && uv.y < self.height
    }

    /// Pixel to normalized image coordinates.
    pub fn normalize(&self, uv: &Vector2<f64>) -> Vector2<f64> {
        Vector2::new((uv.x - self.cx) / self.fx, (uv.y - self.cy) / self.fy)
    }
}

/// Perspective projection of a point expressed in the camera frame.
pub fn project(k: &CameraIntrinsics, p: &Vector3<f64>) -> Result<Vector2<f64>> {
    if p.z <= MIN_DEPTH {
        return Err(Error::BehindCamera { z: p.z });
    }
    Ok(Vector2::new(
        k.fx * p.x / p.z + k.cx,
        k.fy * p.y / p.z + k.cy,
    ))
}

/// Derivative of [`project`] with respect to the camera-frame point.
pub fn project_jacobian(k: &CameraIntrinsics, p: &Vector3<f64>) -> Result<Matrix2x3<f64>> {
    if p.z <= MIN_DEPTH {
        return Err(Error::BehindCamera { z: p.z });
    }
    let iz = 1.0 / p.z;
    let iz2 = iz * iz;
    Ok(Matrix2x3::new(
        k.fx * iz,
        0.0,
        -k.fx * p.x * iz2,
        0.0,
        k.fy * iz,
        -k.fy * p.y * iz2,
    ))
}
