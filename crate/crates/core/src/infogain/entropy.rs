use std::f64::consts::{E, PI};

use nalgebra::{Cholesky, DMatrix, U12};

use crate::error::{Error, Result};
use crate::estimator::{information_matrix, CalibrationParams, Matrix12};
use crate::sensing::{CameraIntrinsics, MeasurementSet, TargetBoard};

/// Largest accepted condition number of an information matrix.
pub const MAX_CONDITION: f64 = 1e12;

/// Number of calibration parameters.
const DIM: f64 = 12.0;

/// Differential entropy of a 12-dimensional Gaussian with unit covariance,
/// `6 ln(2 pi e)`.
pub fn unit_entropy() -> f64 {
    0.5 * DIM * (2.0 * PI * E).ln()
}

/// First-order uncertainty of the calibration: the information matrix
/// `J^T J`, its inverse and the Gaussian differential entropy.
#[derive(Clone, Debug, PartialEq)]
pub struct InfoState {
    pub information: Matrix12,
    pub covariance: Matrix12,
    /// Nats.
    pub entropy: f64,
    /// Number of measurement sets the information was accumulated from.
    pub set_count: usize,
    /// Pixel sigma scaling the covariance to `sigma^2 (J^T J)^-1`; 1 keeps
    /// the unweighted form. Cancels in every entropy difference.
    pub sigma: f64,
}

impl InfoState {
    pub fn new(information: Matrix12, set_count: usize) -> Result<Self> {
        Self::with_sigma(information, set_count, 1.0)
    }

    pub fn with_sigma(information: Matrix12, set_count: usize, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidConfig(format!("covariance sigma must be positive, got {sigma}")));
        }
        let information = symmetrize(&information);
        check_condition(&information)?;
        let chol = Cholesky::<f64, U12>::new(information)
            .ok_or(Error::SingularInformation { condition: f64::INFINITY })?;
        let logdet = log_determinant(&chol);
        let covariance = chol.inverse() * (sigma * sigma);
        let entropy = unit_entropy() - 0.5 * logdet + DIM * sigma.ln();
        Ok(InfoState {
            information,
            covariance,
            entropy,
            set_count,
            sigma,
        })
    }

    /// Information of all `sets` linearized at `theta`.
    pub fn from_sets(
        theta: &CalibrationParams,
        sets: &[MeasurementSet],
        board: &TargetBoard,
        k: &CameraIntrinsics,
        sigma: f64,
    ) -> Result<Self> {
        let info = information_matrix(theta, sets, board, k)?;
        Self::with_sigma(info, sets.len(), sigma)
    }

    /// State after adding one more block of information.
    pub fn updated(&self, block: &Matrix12) -> Result<Self> {
        Self::with_sigma(self.information + block, self.set_count + 1, self.sigma)
    }

    /// Standard deviation of each tangent parameter.
    pub fn std_devs(&self) -> [f64; 12] {
        std::array::from_fn(|i| self.covariance[(i, i)].sqrt())
    }
}

/// Covariance and entropy of a stacked `N x 12` Jacobian.
pub fn fim_covariance(jacobian: &DMatrix<f64>) -> Result<(Matrix12, f64)> {
    if jacobian.ncols() != 12 {
        return Err(Error::InvariantViolation(format!(
            "jacobian has {} columns, expected 12",
            jacobian.ncols()
        )));
    }
    let jtj = jacobian.transpose() * jacobian;
    let state = InfoState::new(Matrix12::from_iterator(jtj.iter().copied()), 1)?;
    Ok((state.covariance, state.entropy))
}

fn symmetrize(m: &Matrix12) -> Matrix12 {
    (m + m.transpose()) * 0.5
}

fn check_condition(info: &Matrix12) -> Result<()> {
    let eig = info.symmetric_eigenvalues();
    let (min, max) = (eig.min(), eig.max());
    let condition = if min > 0.0 { max / min } else { f64::INFINITY };
    if condition.is_nan() || condition > MAX_CONDITION {
        return Err(Error::SingularInformation { condition });
    }
    Ok(())
}

fn log_determinant(chol: &Cholesky<f64, U12>) -> f64 {
    2.0 * chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn identity_information() {
        let s = InfoState::new(Matrix12::identity(), 1).unwrap();
        assert_relative_eq!(s.entropy, 17.0273, epsilon = 1e-4);
        assert_relative_eq!(s.covariance, Matrix12::identity(), epsilon = 1e-15);
    }

    #[test]
    fn scaling_law() {
        for c in [0.01, 2.0, 1e4] {
            let s = InfoState::new(Matrix12::identity() * c, 1).unwrap();
            assert_relative_eq!(s.entropy, unit_entropy() - 6.0 * f64::ln(c), epsilon = 1e-12);
        }
    }

    #[test]
    fn doubling_information_drops_six_ln_two() {
        let m = Matrix12::from_fn(|i, j| ((i * 7 + j * 3) % 5) as f64 * 0.1);
        let info = m * m.transpose() + Matrix12::identity();
        let a = InfoState::new(info, 1).unwrap();
        let b = InfoState::new(info * 2.0, 2).unwrap();
        assert_relative_eq!(a.entropy - b.entropy, 6.0 * 2f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn sigma_offsets_entropy_only() {
        let a = InfoState::new(Matrix12::identity() * 3.0, 1).unwrap();
        let b = InfoState::with_sigma(Matrix12::identity() * 3.0, 1, 0.5).unwrap();
        assert_relative_eq!(b.entropy - a.entropy, 12.0 * 0.5f64.ln(), epsilon = 1e-12);
        assert_relative_eq!(b.covariance, a.covariance * 0.25, epsilon = 1e-15);
    }

    #[test]
    fn singular_information_is_rejected() {
        let mut info = Matrix12::identity();
        info[(11, 11)] = 0.0;
        assert!(matches!(
            InfoState::new(info, 1),
            Err(Error::SingularInformation { .. })
        ));
        info[(11, 11)] = 1e-13;
        assert!(matches!(
            InfoState::new(info, 1),
            Err(Error::SingularInformation { .. })
        ));
    }

    #[test]
    fn fim_covariance_of_stacked_jacobian() {
        let j = DMatrix::from_fn(30, 12, |i, c| ((i * 13 + c * 7) % 11) as f64 - 5.0 + (i == c) as u8 as f64);
        let (cov, h) = fim_covariance(&j).unwrap();
        let jtj = j.transpose() * &j;
        let prod = Matrix12::from_iterator(jtj.iter().copied()) * cov;
        assert_relative_eq!(prod, Matrix12::identity(), epsilon = 1e-6);
        let logdet = jtj.determinant().ln();
        assert_relative_eq!(h, unit_entropy() - 0.5 * logdet, epsilon = 1e-8);
        assert!(fim_covariance(&DMatrix::zeros(5, 11)).is_err());
    }

    proptest! {
        #[test]
        fn adding_information_never_raises_entropy(
            a in proptest::collection::vec(-1.0f64..1.0, 144),
            b in proptest::collection::vec(-1.0f64..1.0, 144),
        ) {
            let a = Matrix12::from_column_slice(&a);
            let b = Matrix12::from_column_slice(&b);
            let base = a * a.transpose() + Matrix12::identity() * 0.1;
            let s = InfoState::new(base, 1).unwrap();
            let t = s.updated(&(b * b.transpose())).unwrap();
            prop_assert!(t.entropy <= s.entropy + 1e-9);
            let prod = s.information * s.covariance;
            prop_assert!((prod - Matrix12::identity()).abs().max() < 1e-6);
        }
    }
}
