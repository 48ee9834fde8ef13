//! SO(3) / SE(3) primitives.
//!
//! Conventions used throughout the crate:
//!
//! - A twist is ordered translation first, rotation second: `(rho, phi)`.
//! - Poses are perturbed on the left, `T <- exp(delta) * T`. With this choice
//!   the derivative of a transformed point `q = T * p` with respect to the
//!   perturbation is `[I | -[q]x]`, which is what every Jacobian in
//!   [`crate::estimator`] is built from.
//! - A pose named `T_ab` maps coordinates expressed in frame `b` into frame `a`.

use std::f64::consts::PI;
use std::ops::Mul;

use nalgebra::{Matrix3, Matrix4, Quaternion, Rotation3, UnitQuaternion, Vector3, Vector6};

use crate::error::{Error, Result};

/// Below this rotation angle the closed forms switch to their Taylor series.
const SMALL_ANGLE: f64 = 1e-8;

/// Angles closer than this to pi have no unique logarithm.
const PI_MARGIN: f64 = 1e-6;

/// Skew-symmetric matrix such that `skew(a) * b == a.cross(&b)`.
pub fn skew(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// An element of SO(3), stored as a 3x3 orthonormal matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rotation(Matrix3<f64>);

impl Rotation {
    pub fn identity() -> Self {
        Rotation(Matrix3::identity())
    }

    /// Wraps a matrix that the caller guarantees is a proper rotation.
    pub fn from_matrix_unchecked(m: Matrix3<f64>) -> Self {
        Rotation(m)
    }

    /// Projects an arbitrary 3x3 matrix onto the closest rotation (Frobenius
    /// norm), forcing `det = +1`.
    pub fn from_matrix_projected(m: &Matrix3<f64>) -> Self {
        let svd = m.svd(true, true);
        let u = svd.u.expect("svd u");
        let v_t = svd.v_t.expect("svd v_t");
        let mut d = Matrix3::identity();
        if (u * v_t).determinant() < 0.0 {
            d[(2, 2)] = -1.0;
        }
        Rotation(u * d * v_t)
    }

    pub fn from_axis_angle(axis: &Vector3<f64>, angle: f64) -> Self {
        Self::exp(&(axis.normalize() * angle))
    }

    /// Rodrigues' formula.
    pub fn exp(phi: &Vector3<f64>) -> Self {
        let theta = phi.norm();
        let k = skew(phi);
        let k2 = k * k;
        if theta < SMALL_ANGLE {
            return Rotation(Matrix3::identity() + k + 0.5 * k2);
        }
        let a = theta.sin() / theta;
        let b = (1.0 - theta.cos()) / (theta * theta);
        Rotation(Matrix3::identity() + a * k + b * k2)
    }

    /// Rotation vector `phi` with `exp(phi) == self` and `|phi|` in `[0, pi]`.
    pub fn log(&self) -> Vector3<f64> {
        let r = &self.0;
        // w = sin(theta) * axis
        let w = 0.5 * Vector3::new(r[(2, 1)] - r[(1, 2)], r[(0, 2)] - r[(2, 0)], r[(1, 0)] - r[(0, 1)]);
        let c = ((r.trace() - 1.0) * 0.5).clamp(-1.0, 1.0);
        let s = w.norm();
        let theta = s.atan2(c);
        if theta < SMALL_ANGLE {
            return w * (1.0 + theta * theta / 6.0);
        }
        if c > 0.0 || s > 1e-2 {
            return w * (theta / s);
        }
        // Near pi sin(theta) carries no precision; recover the axis from the
        // symmetric part, (R + R^T)/2 - cI = (1 - c) a a^T.
        let b = 0.5 * (r + r.transpose()) - Matrix3::identity() * c;
        let i = (0..3)
            .max_by(|&i, &j| b[(i, i)].total_cmp(&b[(j, j)]))
            .unwrap_or(0);
        let mut axis = b.column(i).into_owned();
        axis /= axis.norm();
        if axis.dot(&w) < 0.0 {
            axis = -axis;
        }
        axis * theta
    }

    /// Rotation angle in `[0, pi]`.
    pub fn angle(&self) -> f64 {
        let r = &self.0;
        let s = 0.5
            * Vector3::new(r[(2, 1)] - r[(1, 2)], r[(0, 2)] - r[(2, 0)], r[(1, 0)] - r[(0, 1)])
                .norm();
        let c = ((r.trace() - 1.0) * 0.5).clamp(-1.0, 1.0);
        s.atan2(c)
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    pub fn inverse(&self) -> Self {
        Rotation(self.0.transpose())
    }

    pub fn rotate(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.0 * v
    }

    /// Re-projects onto SO(3), removing accumulated floating point drift.
    pub fn renormalized(&self) -> Self {
        Self::from_matrix_projected(&self.0)
    }

    /// Largest absolute entry of `R R^T - I`.
    pub fn orthonormality_error(&self) -> f64 {
        (self.0 * self.0.transpose() - Matrix3::identity()).amax()
    }

    /// Unit quaternion, `[w, x, y, z]`, with `w >= 0`.
    pub fn to_quaternion(&self) -> [f64; 4] {
        let q = UnitQuaternion::from_rotation_matrix(&Rotation3::from_matrix_unchecked(self.0));
        let q = q.quaternion();
        let sign = if q.w < 0.0 { -1.0 } else { 1.0 };
        [sign * q.w, sign * q.i, sign * q.j, sign * q.k]
    }

    /// Builds a rotation from a `[w, x, y, z]` quaternion, which is normalized
    /// first. Callers that must reject non-unit input check the norm themselves.
    pub fn from_quaternion(q: [f64; 4]) -> Self {
        let uq = UnitQuaternion::from_quaternion(Quaternion::new(q[0], q[1], q[2], q[3]));
        Rotation(*uq.to_rotation_matrix().matrix())
    }
}

impl Mul for Rotation {
    type Output = Rotation;

    fn mul(self, rhs: Rotation) -> Rotation {
        Rotation(self.0 * rhs.0)
    }
}

/// Left Jacobian of SO(3).
pub fn so3_left_jacobian(phi: &Vector3<f64>) -> Matrix3<f64> {
    let theta = phi.norm();
    let k = skew(phi);
    let k2 = k * k;
    if theta < SMALL_ANGLE {
        return Matrix3::identity() + 0.5 * k + k2 / 6.0;
    }
    let t2 = theta * theta;
    Matrix3::identity() + (1.0 - theta.cos()) / t2 * k + (theta - theta.sin()) / (t2 * theta) * k2
}

/// Inverse of [`so3_left_jacobian`].
pub fn so3_left_jacobian_inv(phi: &Vector3<f64>) -> Matrix3<f64> {
    let theta = phi.norm();
    let k = skew(phi);
    let k2 = k * k;
    if theta < SMALL_ANGLE {
        return Matrix3::identity() - 0.5 * k + k2 / 12.0;
    }
    let coeff = 1.0 / (theta * theta) - (1.0 + theta.cos()) / (2.0 * theta * theta.sin());
    Matrix3::identity() - 0.5 * k + coeff * k2
}

/// An element of se(3), ordered `(rho, phi)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Twist(pub Vector6<f64>);

impl Twist {
    pub fn zero() -> Self {
        Twist(Vector6::zeros())
    }

    pub fn new(rho: Vector3<f64>, phi: Vector3<f64>) -> Self {
        Twist(Vector6::new(rho.x, rho.y, rho.z, phi.x, phi.y, phi.z))
    }

    pub fn from_slice(v: &[f64]) -> Self {
        Twist(Vector6::from_column_slice(v))
    }

    pub fn rho(&self) -> Vector3<f64> {
        self.0.fixed_rows::<3>(0).into_owned()
    }

    pub fn phi(&self) -> Vector3<f64> {
        self.0.fixed_rows::<3>(3).into_owned()
    }

    pub fn as_vector(&self) -> &Vector6<f64> {
        &self.0
    }
}

/// A rigid transform in SE(3).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pose {
    pub rotation: Rotation,
    pub translation: Vector3<f64>,
}

impl Default for Pose {
    fn default() -> Self {
        Self::identity()
    }
}

impl Pose {
    pub fn identity() -> Self {
        Pose {
            rotation: Rotation::identity(),
            translation: Vector3::zeros(),
        }
    }

    pub fn new(rotation: Rotation, translation: Vector3<f64>) -> Self {
        Pose {
            rotation,
            translation,
        }
    }

    pub fn from_translation(t: Vector3<f64>) -> Self {
        Pose::new(Rotation::identity(), t)
    }

    pub fn exp(xi: &Twist) -> Self {
        let phi = xi.phi();
        Pose {
            rotation: Rotation::exp(&phi),
            translation: so3_left_jacobian(&phi) * xi.rho(),
        }
    }

    pub fn log(&self) -> Result<Twist> {
        let phi = self.rotation.log();
        if phi.norm() > PI - PI_MARGIN {
            return Err(Error::AngleAtPi);
        }
        Ok(Twist::new(so3_left_jacobian_inv(&phi) * self.translation, phi))
    }

    pub fn compose(&self, rhs: &Pose) -> Pose {
        Pose {
            rotation: self.rotation * rhs.rotation,
            translation: self.rotation.rotate(&rhs.translation) + self.translation,
        }
    }

    pub fn inverse(&self) -> Pose {
        let r_inv = self.rotation.inverse();
        Pose {
            rotation: r_inv,
            translation: -r_inv.rotate(&self.translation),
        }
    }

    /// Applies the transform to a point.
    pub fn act(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation.rotate(p) + self.translation
    }

    pub fn rotation_angle(&self) -> f64 {
        self.rotation.angle()
    }

    /// Left perturbation, `exp(delta) * self`.
    pub fn perturbed(&self, delta: &Twist) -> Pose {
        Pose::exp(delta).compose(self)
    }

    pub fn to_homogeneous(&self) -> Matrix4<f64> {
        let mut m = Matrix4::identity();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(self.rotation.matrix());
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.translation);
        m
    }
}

impl Mul for Pose {
    type Output = Pose;

    fn mul(self, rhs: Pose) -> Pose {
        self.compose(&rhs)
    }
}

impl Mul<&Pose> for &Pose {
    type Output = Pose;

    fn mul(self, rhs: &Pose) -> Pose {
        self.compose(rhs)
    }
}

pub fn exp_se3(xi: &Twist) -> Pose {
    Pose::exp(xi)
}

pub fn log_se3(t: &Pose) -> Result<Twist> {
    t.log()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_twist(rng: &mut ChaCha8Rng, max_angle: f64) -> Twist {
        let rho = Vector3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        let axis = Vector3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        )
        .normalize();
        Twist::new(rho, axis * rng.random_range(0.0..max_angle))
    }

    #[test]
    fn exp_of_zero_is_identity() {
        let t = exp_se3(&Twist::zero());
        assert_eq!(t, Pose::identity());
    }

    #[test]
    fn exp_pure_translation() {
        let t = exp_se3(&Twist::from_slice(&[1.0, 2.0, 3.0, 0.0, 0.0, 0.0]));
        assert_eq!(*t.rotation.matrix(), Matrix3::identity());
        assert_eq!(t.translation, Vector3::new(1.0, 2.0, 3.0));
    }

    #[test]
    fn exp_quarter_turn_about_z() {
        let t = exp_se3(&Twist::from_slice(&[0.0, 0.0, 0.0, 0.0, 0.0, PI / 2.0]));
        let y = t.act(&Vector3::x());
        assert_relative_eq!(y, Vector3::y(), epsilon = 1e-15);
        assert_relative_eq!(t.translation.norm(), 0.0);
    }

    #[test]
    fn log_identity_and_translation() {
        assert_eq!(log_se3(&Pose::identity()).unwrap(), Twist::zero());
        let xi = log_se3(&Pose::from_translation(Vector3::new(1.0, 2.0, 3.0))).unwrap();
        assert_relative_eq!(xi.0, Vector6::new(1.0, 2.0, 3.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn log_rejects_half_turn() {
        let t = Pose::new(Rotation::from_axis_angle(&Vector3::x(), PI), Vector3::zeros());
        assert!(matches!(log_se3(&t), Err(Error::AngleAtPi)));
        let t = Pose::new(
            Rotation::from_axis_angle(&Vector3::y(), PI - 1e-7),
            Vector3::zeros(),
        );
        assert!(matches!(log_se3(&t), Err(Error::AngleAtPi)));
    }

    #[test]
    fn log_round_trip_seeded() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let xi = random_twist(&mut rng, 3.0);
            let back = log_se3(&exp_se3(&xi)).unwrap();
            assert!((back.0 - xi.0).amax() < 1e-10, "{xi:?} -> {back:?}");
        }
    }

    #[test]
    fn log_near_pi_is_accurate() {
        let axis = Vector3::new(0.3, -0.5, 0.8).normalize();
        for angle in [PI - 1e-3, PI - 1e-4, PI - 1e-5] {
            let r = Rotation::from_axis_angle(&axis, angle);
            let phi = r.log();
            assert!((phi - axis * angle).norm() < 1e-9, "angle {angle}: {phi:?}");
        }
    }

    #[test]
    fn compose_and_act() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = exp_se3(&random_twist(&mut rng, 3.0));
        let b = exp_se3(&random_twist(&mut rng, 3.0));
        let p = Vector3::new(0.2, -0.7, 1.3);
        assert_relative_eq!((a * b).act(&p), a.act(&b.act(&p)), epsilon = 1e-12);
        assert_relative_eq!(a.inverse().act(&a.act(&p)), p, epsilon = 1e-12);
        let id = a * a.inverse();
        assert_relative_eq!(*id.rotation.matrix(), Matrix3::identity(), epsilon = 1e-12);
        assert_relative_eq!(id.translation, Vector3::zeros(), epsilon = 1e-12);
        assert_eq!(Pose::identity().act(&p), p);
    }

    #[test]
    fn act_quarter_turn_with_offset() {
        let t = Pose::new(
            Rotation::from_axis_angle(&Vector3::z(), PI / 2.0),
            Vector3::new(1.0, 0.0, 0.0),
        );
        assert_relative_eq!(t.act(&Vector3::x()), Vector3::new(1.0, 1.0, 0.0), epsilon = 1e-15);
    }

    #[test]
    fn rotation_angle_cases() {
        assert_eq!(Pose::identity().rotation_angle(), 0.0);
        for axis in [Vector3::x(), Vector3::y(), Vector3::new(1.0, 1.0, 1.0)] {
            let r = Rotation::from_axis_angle(&axis, PI / 2.0);
            assert_relative_eq!(r.angle(), PI / 2.0, epsilon = 1e-15);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let axis = Vector3::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            );
            let r = Rotation::from_axis_angle(&axis, 0.3);
            assert!((r.angle() - 0.3).abs() < 1e-12);
        }
        assert_relative_eq!(Rotation::from_axis_angle(&Vector3::z(), PI).angle(), PI);
    }

    #[test]
    fn orthonormality_survives_long_composition_chains() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let steps: Vec<Pose> = (0..16).map(|_| exp_se3(&random_twist(&mut rng, 3.0))).collect();
        let mut acc = Pose::identity();
        for i in 0..10_000 {
            acc = acc * steps[i % steps.len()];
        }
        let r = acc.rotation.matrix();
        assert!(acc.rotation.orthonormality_error() < 1e-7);
        assert!((r.determinant() - 1.0).abs() < 1e-7);
        assert!(acc.rotation.renormalized().orthonormality_error() < 1e-12);
    }

    #[test]
    fn left_perturbation_matches_first_order_expansion() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let t = exp_se3(&random_twist(&mut rng, 3.0));
            let p = Vector3::new(0.1, 0.2, 0.3);
            let q = t.act(&p);
            let delta = Twist(random_twist(&mut rng, 1.0).0.normalize() * 1e-6);
            let moved = t.perturbed(&delta).act(&p);
            let linear = q + delta.rho() - skew(&q) * delta.phi();
            assert!((moved - linear).amax() < 1e-10);
        }
    }

    #[test]
    fn quaternion_round_trip() {
        let r = Rotation::from_axis_angle(&Vector3::new(1.0, -2.0, 0.5), 2.0);
        let q = r.to_quaternion();
        assert!(q[0] >= 0.0);
        let back = Rotation::from_quaternion(q);
        assert_relative_eq!(*back.matrix(), *r.matrix(), epsilon = 1e-14);
        let id = Rotation::identity().to_quaternion();
        assert_eq!(id, [1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn left_jacobian_inverse_pair() {
        let phi = Vector3::new(0.4, -1.1, 0.9);
        let prod = so3_left_jacobian(&phi) * so3_left_jacobian_inv(&phi);
        assert_relative_eq!(prod, Matrix3::identity(), epsilon = 1e-13);
        let tiny = Vector3::new(1e-10, 0.0, 0.0);
        let prod = so3_left_jacobian(&tiny) * so3_left_jacobian_inv(&tiny);
        assert_relative_eq!(prod, Matrix3::identity(), epsilon = 1e-15);
    }

    proptest! {
        #[test]
        fn exp_log_round_trip(
            rho in prop::array::uniform3(-2.0f64..2.0),
            axis in prop::array::uniform3(-1.0f64..1.0),
            angle in 0.0f64..3.0,
        ) {
            let axis = Vector3::from(axis);
            prop_assume!(axis.norm() > 1e-3);
            let xi = Twist::new(Vector3::from(rho), axis.normalize() * angle);
            let back = log_se3(&exp_se3(&xi)).unwrap();
            prop_assert!((back.0 - xi.0).amax() < 1e-9);
        }

        #[test]
        fn rotations_stay_orthonormal(axis in prop::array::uniform3(-1.0f64..1.0), angle in 0.0f64..PI) {
            let axis = Vector3::from(axis);
            prop_assume!(axis.norm() > 1e-3);
            let r = Rotation::from_axis_angle(&axis, angle);
            prop_assert!(r.orthonormality_error() < 1e-9);
            prop_assert!((r.matrix().determinant() - 1.0).abs() < 1e-9);
        }
    }
}
