use nalgebra::{DMatrix, Matrix2, Matrix3, SMatrix, SVector, Vector2, Vector3, Vector6};

use super::lm::{levenberg_marquardt, LeastSquares};
use super::{Convergence, SolverConfig};
use crate::error::{Error, Result};
use crate::geom::{skew, Pose, Rotation, Twist};
use crate::sensing::{project, project_jacobian, CameraIntrinsics, PixelObservation, TargetBoard};

/// Camera pose from observations of the planar board.
///
/// A homography between the board plane and normalized image coordinates is
/// estimated by DLT on Hartley-normalized points, decomposed into an initial
/// pose, then refined by Levenberg-Marquardt on pixel reprojection error.
///
/// Returns `T_cw`, which maps world (board) points into the camera frame.
pub fn solve_pnp(
    board: &TargetBoard,
    observations: &[PixelObservation],
    k: &CameraIntrinsics,
) -> Result<Pose> {
    let points: Vec<(Vector3<f64>, Vector2<f64>)> = observations
        .iter()
        .map(|o| Ok((*board.point(o.marker_id)?, o.uv())))
        .collect::<Result<_>>()?;
    if points.len() < 4 {
        return Err(Error::DegenerateConfiguration(format!(
            "need at least 4 points, got {}",
            points.len()
        )));
    }
    check_not_collinear(&points)?;
    let initial = homography_pose(&points, k)?;
    let problem = PnpProblem { points: &points, k };
    let cfg = SolverConfig {
        cost_abs_tolerance: 1e-20,
        ..SolverConfig::default()
    };
    let out = levenberg_marquardt(&problem, initial, &cfg)?;
    if out.convergence == Convergence::MaxIterations {
        return Err(Error::NoConvergence {
            iterations: out.iterations,
        });
    }
    let pose = out.params;
    if points.iter().any(|(p, _)| pose.act(p).z <= 0.0) {
        return Err(Error::DegenerateConfiguration(
            "refined pose puts board points behind the camera".into(),
        ));
    }
    Ok(pose)
}

fn check_not_collinear(points: &[(Vector3<f64>, Vector2<f64>)]) -> Result<()> {
    let n = points.len() as f64;
    let mean = points.iter().map(|(p, _)| p.xy()).sum::<Vector2<f64>>() / n;
    let cov = points.iter().fold(Matrix2::zeros(), |acc, (p, _)| {
        let d = p.xy() - mean;
        acc + d * d.transpose()
    });
    let eig = cov.symmetric_eigenvalues();
    if eig.min() <= 1e-12 * eig.max() {
        return Err(Error::DegenerateConfiguration("board points are collinear".into()));
    }
    Ok(())
}

/// Similarity transform that moves the centroid to the origin and scales the
/// mean distance to sqrt(2).
fn hartley(points: impl Iterator<Item = Vector2<f64>> + Clone) -> Matrix3<f64> {
    let n = points.clone().count() as f64;
    let mean = points.clone().sum::<Vector2<f64>>() / n;
    let mean_dist = points.map(|p| (p - mean).norm()).sum::<f64>() / n;
    let s = std::f64::consts::SQRT_2 / mean_dist;
    Matrix3::new(s, 0.0, -s * mean.x, 0.0, s, -s * mean.y, 0.0, 0.0, 1.0)
}

fn homography_pose(points: &[(Vector3<f64>, Vector2<f64>)], k: &CameraIntrinsics) -> Result<Pose> {
    let plane: Vec<Vector2<f64>> = points.iter().map(|(p, _)| p.xy()).collect();
    let image: Vec<Vector2<f64>> = points.iter().map(|(_, uv)| k.normalize(uv)).collect();
    let t_plane = hartley(plane.iter().copied());
    let t_image = hartley(image.iter().copied());

    let rows = (2 * points.len()).max(9);
    let mut a = DMatrix::zeros(rows, 9);
    for (i, (x, u)) in plane.iter().zip(&image).enumerate() {
        let x = t_plane * x.push(1.0);
        let u = t_image * u.push(1.0);
        let (x, y) = (x.x, x.y);
        let (u, v) = (u.x, u.y);
        a.row_mut(2 * i)
            .copy_from_slice(&[0.0, 0.0, 0.0, -x, -y, -1.0, v * x, v * y, v]);
        a.row_mut(2 * i + 1)
            .copy_from_slice(&[x, y, 1.0, 0.0, 0.0, 0.0, -u * x, -u * y, -u]);
    }
    let svd = a.svd(false, true);
    let v_t = svd.v_t.expect("svd v_t");
    let sv = svd.singular_values.as_slice();
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&i, &j| sv[i].total_cmp(&sv[j]));
    let max = sv[order[sv.len() - 1]];
    if sv[order[1]] <= 1e-12 * max {
        return Err(Error::DegenerateConfiguration("homography DLT is rank deficient".into()));
    }
    let h = v_t.row(order[0]);
    let h_norm = Matrix3::new(h[0], h[1], h[2], h[3], h[4], h[5], h[6], h[7], h[8]);
    let inv_image = t_image
        .try_inverse()
        .ok_or_else(|| Error::DegenerateConfiguration("image normalization".into()))?;
    let hom = inv_image * h_norm * t_plane;

    let h1 = hom.column(0).into_owned();
    let h2 = hom.column(1).into_owned();
    let h3 = hom.column(2).into_owned();
    let mut scale = 2.0 / (h1.norm() + h2.norm());
    if h3.z * scale < 0.0 {
        scale = -scale;
    }
    let r1 = h1 * scale;
    let r2 = h2 * scale;
    let r3 = r1.cross(&r2);
    let rotation = Rotation::from_matrix_projected(&Matrix3::from_columns(&[r1, r2, r3]));
    Ok(Pose::new(rotation, h3 * scale))
}

struct PnpProblem<'a> {
    points: &'a [(Vector3<f64>, Vector2<f64>)],
    k: &'a CameraIntrinsics,
}

impl LeastSquares<6> for PnpProblem<'_> {
    type Params = Pose;

    fn normal_equations(
        &self,
        x: &Pose,
    ) -> Result<(SMatrix<f64, 6, 6>, SVector<f64, 6>, f64)> {
        let mut h = SMatrix::<f64, 6, 6>::zeros();
        let mut g = Vector6::zeros();
        let mut cost = 0.0;
        for (p, uv) in self.points {
            let pc = x.act(p);
            let r = uv - project(self.k, &pc)?;
            let mut d = SMatrix::<f64, 3, 6>::zeros();
            d.fixed_view_mut::<3, 3>(0, 0).fill_with_identity();
            d.fixed_view_mut::<3, 3>(0, 3).copy_from(&(-skew(&pc)));
            let j = -project_jacobian(self.k, &pc)? * d;
            h += j.transpose() * j;
            g += j.transpose() * r;
            cost += r.norm_squared();
        }
        Ok((h, g, cost))
    }

    fn cost(&self, x: &Pose) -> Result<f64> {
        self.points.iter().try_fold(0.0, |acc, (p, uv)| {
            Ok(acc + (uv - project(self.k, &x.act(p))?).norm_squared())
        })
    }

    fn retract(&self, x: &Pose, delta: &Vector6<f64>) -> Pose {
        x.perturbed(&Twist(*delta))
    }
}
