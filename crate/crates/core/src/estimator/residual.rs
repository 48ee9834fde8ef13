use nalgebra::{DMatrix, DVector, Matrix2x3, Matrix3x6, Vector2, Vector3};

use super::{CalibrationParams, Matrix12, Vector12};
use crate::error::Result;
use crate::geom::skew;
use crate::sensing::{project, project_jacobian, CameraIntrinsics, MeasurementSet, TargetBoard};

/// Reprojection residuals `observed - projected` of one measurement set,
/// in marker id order.
#[derive(Clone, Debug, PartialEq)]
pub struct ResidualBlock {
    pub marker_ids: Vec<usize>,
    /// Interleaved `(du, dv)` pairs, length `2 * marker_ids.len()`.
    pub values: DVector<f64>,
}

impl ResidualBlock {
    pub fn squared_norm(&self) -> f64 {
        self.values.norm_squared()
    }

    pub fn marker(&self, i: usize) -> Vector2<f64> {
        Vector2::new(self.values[2 * i], self.values[2 * i + 1])
    }
}

/// Residual Jacobian of one measurement set: `F` with respect to `xi_ce`,
/// `E` with respect to `xi_bw`; both `2m x 6`.
#[derive(Clone, Debug, PartialEq)]
pub struct JacobianBlock {
    pub f: DMatrix<f64>,
    pub e: DMatrix<f64>,
}

impl JacobianBlock {
    /// `[F | E]`, `2m x 12`.
    pub fn stacked(&self) -> DMatrix<f64> {
        let mut j = DMatrix::zeros(self.f.nrows(), 12);
        j.view_mut((0, 0), (self.f.nrows(), 6)).copy_from(&self.f);
        j.view_mut((0, 6), (self.e.nrows(), 6)).copy_from(&self.e);
        j
    }

    /// This block's contribution to the information matrix,
    /// `[F^T F, F^T E; E^T F, E^T E]`.
    pub fn information(&self) -> Matrix12 {
        let mut h = Matrix12::zeros();
        h.fixed_view_mut::<6, 6>(0, 0).copy_from(&(self.f.transpose() * &self.f));
        let fe = self.f.transpose() * &self.e;
        h.fixed_view_mut::<6, 6>(0, 6).copy_from(&fe);
        h.fixed_view_mut::<6, 6>(6, 0).copy_from(&fe.transpose());
        h.fixed_view_mut::<6, 6>(6, 6).copy_from(&(self.e.transpose() * &self.e));
        h
    }

    pub fn rows(&self) -> usize {
        self.f.nrows()
    }
}

/// Per-marker geometry shared by the residual and its Jacobian.
struct MarkerChain {
    p_c: Vector3<f64>,
    p_b: Vector3<f64>,
}

fn chain(theta: &CalibrationParams, set: &MeasurementSet, p_w: &Vector3<f64>) -> MarkerChain {
    let p_b = theta.t_bw.act(p_w);
    let p_c = theta.t_ce.act(&set.robot_pose.act(&p_b));
    MarkerChain { p_c, p_b }
}

pub fn residuals(
    theta: &CalibrationParams,
    set: &MeasurementSet,
    board: &TargetBoard,
    k: &CameraIntrinsics,
) -> Result<ResidualBlock> {
    let mut values = DVector::zeros(2 * set.len());
    let mut marker_ids = Vec::with_capacity(set.len());
    for (i, obs) in set.observations.iter().enumerate() {
        let c = chain(theta, set, board.point(obs.marker_id)?);
        let r = obs.uv() - project(k, &c.p_c)?;
        values[2 * i] = r.x;
        values[2 * i + 1] = r.y;
        marker_ids.push(obs.marker_id);
    }
    Ok(ResidualBlock { marker_ids, values })
}

/// Analytic residual Jacobian under left perturbation of both transforms.
///
/// With `P_c = T_ce T_eb T_bw P_w` and `P_b = T_bw P_w`:
/// `F = -dpi/dP_c [I | -[P_c]x]` and
/// `E = -dpi/dP_c R_ce R_eb [I | -[P_b]x]`.
pub fn jacobian_block(
    theta: &CalibrationParams,
    set: &MeasurementSet,
    board: &TargetBoard,
    k: &CameraIntrinsics,
) -> Result<JacobianBlock> {
    let m = set.len();
    let mut f = DMatrix::zeros(2 * m, 6);
    let mut e = DMatrix::zeros(2 * m, 6);
    let r_cb = theta.t_ce.rotation.matrix() * set.robot_pose.rotation.matrix();
    for (i, obs) in set.observations.iter().enumerate() {
        let c = chain(theta, set, board.point(obs.marker_id)?);
        let (fi, ei) = marker_jacobian(k, &c, &r_cb)?;
        f.fixed_view_mut::<2, 6>(2 * i, 0).copy_from(&fi);
        e.fixed_view_mut::<2, 6>(2 * i, 0).copy_from(&ei);
    }
    Ok(JacobianBlock { f, e })
}

fn point_derivative(p: &Vector3<f64>) -> Matrix3x6<f64> {
    let mut d = Matrix3x6::zeros();
    d.fixed_view_mut::<3, 3>(0, 0).fill_with_identity();
    d.fixed_view_mut::<3, 3>(0, 3).copy_from(&(-skew(p)));
    d
}

fn marker_jacobian(
    k: &CameraIntrinsics,
    c: &MarkerChain,
    r_cb: &nalgebra::Matrix3<f64>,
) -> Result<(nalgebra::Matrix2x6<f64>, nalgebra::Matrix2x6<f64>)> {
    let jp: Matrix2x3<f64> = -project_jacobian(k, &c.p_c)?;
    Ok((jp * point_derivative(&c.p_c), jp * r_cb * point_derivative(&c.p_b)))
}

/// The full stacked least-squares system over several measurement sets.
#[derive(Clone, Debug)]
pub struct AssembledSystem {
    pub residuals: DVector<f64>,
    /// `N x 12`, rows ordered by set then marker id, columns `[xi_ce | xi_bw]`.
    pub jacobian: DMatrix<f64>,
    pub hessian: Matrix12,
    pub gradient: Vector12,
}

impl AssembledSystem {
    pub fn cost(&self) -> f64 {
        self.residuals.norm_squared()
    }
}

/// Builds the stacked residual vector and Jacobian, then forms `J^T J` and
/// `J^T r` from them in one shot.
pub fn assemble(
    theta: &CalibrationParams,
    sets: &[MeasurementSet],
    board: &TargetBoard,
    k: &CameraIntrinsics,
) -> Result<AssembledSystem> {
    let rows: usize = sets.iter().map(|s| 2 * s.len()).sum();
    let mut residual_vec = DVector::zeros(rows);
    let mut jacobian = DMatrix::zeros(rows, 12);
    let mut row = 0;
    for set in sets {
        let r = residuals(theta, set, board, k)?;
        let j = jacobian_block(theta, set, board, k)?;
        let n = r.values.len();
        residual_vec.rows_mut(row, n).copy_from(&r.values);
        jacobian.view_mut((row, 0), (n, 12)).copy_from(&j.stacked());
        row += n;
    }
    let jt = jacobian.transpose();
    let hessian = Matrix12::from_iterator((&jt * &jacobian).iter().copied());
    let gradient = Vector12::from_iterator((&jt * &residual_vec).iter().copied());
    Ok(AssembledSystem {
        residuals: residual_vec,
        jacobian,
        hessian,
        gradient,
    })
}

/// `(J^T J, J^T r, sum r^2)` accumulated marker by marker without building
/// the stacked Jacobian.
pub fn normal_equations(
    theta: &CalibrationParams,
    sets: &[MeasurementSet],
    board: &TargetBoard,
    k: &CameraIntrinsics,
) -> Result<(Matrix12, Vector12, f64)> {
    let mut h = Matrix12::zeros();
    let mut g = Vector12::zeros();
    let mut cost = 0.0;
    for set in sets {
        let r_cb = theta.t_ce.rotation.matrix() * set.robot_pose.rotation.matrix();
        for obs in &set.observations {
            let c = chain(theta, set, board.point(obs.marker_id)?);
            let r = obs.uv() - project(k, &c.p_c)?;
            let (fi, ei) = marker_jacobian(k, &c, &r_cb)?;
            let mut j = nalgebra::SMatrix::<f64, 2, 12>::zeros();
            j.fixed_view_mut::<2, 6>(0, 0).copy_from(&fi);
            j.fixed_view_mut::<2, 6>(0, 6).copy_from(&ei);
            h += j.transpose() * j;
            g += j.transpose() * r;
            cost += r.norm_squared();
        }
    }
    Ok((h, g, cost))
}

/// Information matrix `J^T J` only.
pub fn information_matrix(
    theta: &CalibrationParams,
    sets: &[MeasurementSet],
    board: &TargetBoard,
    k: &CameraIntrinsics,
) -> Result<Matrix12> {
    sets.iter().try_fold(Matrix12::zeros(), |acc, set| {
        Ok(acc + jacobian_block(theta, set, board, k)?.information())
    })
}

/// Unweighted loss: sum of squared pixel residuals over all sets.
pub fn total_cost(
    theta: &CalibrationParams,
    sets: &[MeasurementSet],
    board: &TargetBoard,
    k: &CameraIntrinsics,
) -> Result<f64> {
    sets.iter().try_fold(0.0, |acc, set| {
        Ok(acc + residuals(theta, set, board, k)?.squared_norm())
    })
}
