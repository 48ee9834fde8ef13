use nalgebra::{DMatrix, DVector, Matrix3, Vector3};

use super::CalibrationParams;
use crate::error::{Error, Result};
use crate::geom::{Pose, Rotation};

/// Relative singular-value gap below which a linear system is treated as
/// rank deficient.
const RANK_TOLERANCE: f64 = 1e-6;

/// Linear robot-world/hand-eye initializer.
///
/// Each frame gives `T_ce T_eb,k = T_cw,k T_wb`. Rotations are solved jointly
/// from the vectorized form
///
/// ```text
/// (R_eb,k^T ⊗ I) vec(R_ce) - (I ⊗ R_cw,k) vec(R_wb) = 0
/// ```
///
/// as the right singular vector of the smallest singular value, rescaled and
/// projected onto SO(3). Translations then follow from the linear system
/// `t_ce - R_cw,k t_wb = t_cw,k - R_ce t_eb,k`.
///
/// `camera_poses` are `T_cw,k` (world points into the camera frame), e.g.
/// from [`super::solve_pnp`]; `robot_poses` are the matching `T_eb,k`.
pub fn closed_form_init(camera_poses: &[Pose], robot_poses: &[Pose]) -> Result<CalibrationParams> {
    if camera_poses.len() != robot_poses.len() {
        return Err(Error::InvariantViolation(format!(
            "{} camera poses but {} robot poses",
            camera_poses.len(),
            robot_poses.len()
        )));
    }
    let n = camera_poses.len();
    if n < 3 {
        return Err(Error::DegenerateMotion(format!("need at least 3 frames, got {n}")));
    }

    let mut m = DMatrix::zeros(9 * n, 18);
    let id3 = Matrix3::<f64>::identity();
    for (k, (cam, robot)) in camera_poses.iter().zip(robot_poses).enumerate() {
        let a = robot.rotation.matrix().transpose().kronecker(&id3);
        let b = id3.kronecker(cam.rotation.matrix());
        m.view_mut((9 * k, 0), (9, 9)).copy_from(&a);
        m.view_mut((9 * k, 9), (9, 9)).copy_from(&(-b));
    }
    let svd = m.svd(false, true);
    let v_t = svd.v_t.expect("svd v_t");
    let sv = &svd.singular_values;
    let (order, smallest) = sorted_ascending(sv.as_slice());
    let largest = sv.max();
    if sv[order[1]] < RANK_TOLERANCE * largest {
        return Err(Error::DegenerateMotion(format!(
            "rotation system has a multi-dimensional null space (sv ratio {:e}); \
             relative rotation axes are parallel",
            sv[order[1]] / largest
        )));
    }
    let null = v_t.row(smallest).transpose();
    let x = Matrix3::from_column_slice(&null.as_slice()[..9]);
    let y = Matrix3::from_column_slice(&null.as_slice()[9..]);
    // x and y are both alpha * rotation; fix alpha's sign by det > 0.
    let sign = if x.determinant() + y.determinant() < 0.0 { -1.0 } else { 1.0 };
    let r_ce = Rotation::from_matrix_projected(&(x * sign));
    let r_wb = Rotation::from_matrix_projected(&(y * sign));

    let mut a = DMatrix::zeros(3 * n, 6);
    let mut b = DVector::zeros(3 * n);
    for (k, (cam, robot)) in camera_poses.iter().zip(robot_poses).enumerate() {
        a.view_mut((3 * k, 0), (3, 3)).copy_from(&id3);
        a.view_mut((3 * k, 3), (3, 3)).copy_from(&(-cam.rotation.matrix()));
        let rhs = cam.translation - r_ce.rotate(&robot.translation);
        b.rows_mut(3 * k, 3).copy_from(&rhs);
    }
    let svd = a.svd(true, true);
    let sv = &svd.singular_values;
    if sv.min() < RANK_TOLERANCE * sv.max() {
        return Err(Error::DegenerateMotion("translation system is rank deficient".into()));
    }
    let sol = svd
        .solve(&b, 0.0)
        .map_err(|e| Error::DegenerateMotion(e.to_string()))?;
    let t_ce = Vector3::new(sol[0], sol[1], sol[2]);
    let t_wb = Vector3::new(sol[3], sol[4], sol[5]);

    let t_wb = Pose::new(r_wb, t_wb);
    Ok(CalibrationParams::new(Pose::new(r_ce, t_ce), t_wb.inverse()))
}

/// Indices sorted by value plus the index of the smallest value.
fn sorted_ascending(v: &[f64]) -> (Vec<usize>, usize) {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let smallest = idx[0];
    (idx, smallest)
}
