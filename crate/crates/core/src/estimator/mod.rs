//! Robot-world/hand-eye estimation from pixel reprojection residuals.
//!
//! The parameter vector is `[xi_ce | xi_bw]` (12 entries), each block a
//! left-perturbation twist in `(rho, phi)` order. All Jacobians here are
//! Jacobians of the residual `observed - projected`.

mod init;
mod lm;
mod params;
mod pnp;
mod residual;
mod solver;

pub use init::closed_form_init;
pub use params::{CalibrationParams, Matrix12, Vector12};
pub use pnp::solve_pnp;
pub use residual::{
    assemble, information_matrix, jacobian_block, normal_equations, residuals, total_cost,
    AssembledSystem, JacobianBlock, ResidualBlock,
};
pub use solver::{optimize, Convergence, SolveReport, SolverConfig};
