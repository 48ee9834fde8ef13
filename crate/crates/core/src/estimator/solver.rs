use super::lm::{levenberg_marquardt, LeastSquares};
use super::residual::{normal_equations, total_cost};
use super::{CalibrationParams, Matrix12, Vector12};
use crate::error::{Error, Result};
use crate::sensing::{CameraIntrinsics, MeasurementSet, TargetBoard};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig {
    pub max_iterations: usize,
    /// Stop once the cost (sum of squared pixel residuals) drops below this.
    pub cost_abs_tolerance: f64,
    /// Stop when an accepted step lowers the cost by less than this fraction.
    pub cost_rel_tolerance: f64,
    /// Stop when the tangent-space step norm falls below this.
    pub step_tolerance: f64,
    pub initial_damping: f64,
    pub damping_increase: f64,
    pub damping_decrease: f64,
    pub max_damping: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_iterations: 50,
            cost_abs_tolerance: 1e-16,
            cost_rel_tolerance: 1e-12,
            step_tolerance: 1e-12,
            initial_damping: 1e-4,
            damping_increase: 10.0,
            damping_decrease: 10.0,
            max_damping: 1e16,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let tol_ok = self.cost_abs_tolerance > 0.0
            && self.cost_rel_tolerance > 0.0
            && self.step_tolerance > 0.0;
        let damping_ok = self.initial_damping > 0.0
            && self.damping_increase > 1.0
            && self.damping_decrease > 1.0
            && self.max_damping > self.initial_damping;
        if tol_ok && damping_ok && self.max_iterations >= 1 {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("bad solver config {self:?}")))
        }
    }
}

/// Why the optimizer stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Convergence {
    CostBelowTolerance,
    RelativeCostDecrease,
    SmallStep,
    /// No step lowered the cost even with maximal damping: a local minimum
    /// to working precision.
    DampingSaturated,
    /// The iteration cap was hit; the best parameters so far are returned.
    MaxIterations,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveReport {
    pub params: CalibrationParams,
    pub iterations: usize,
    pub initial_cost: f64,
    pub final_cost: f64,
    /// Cost after every accepted step, starting with the initial cost.
    pub cost_trace: Vec<f64>,
    pub convergence: Convergence,
    /// Number of scalar residuals (twice the number of observations).
    pub residual_count: usize,
}

impl SolveReport {
    pub fn converged(&self) -> bool {
        self.convergence != Convergence::MaxIterations
    }

    /// Turns a capped run into [`Error::NoConvergence`].
    pub fn into_result(self) -> Result<Self> {
        if self.converged() {
            Ok(self)
        } else {
            Err(Error::NoConvergence {
                iterations: self.iterations,
            })
        }
    }

    /// Root mean square of the scalar residuals, px.
    pub fn rmse(&self) -> f64 {
        (self.final_cost / self.residual_count as f64).sqrt()
    }

    /// RMSE with the 12 estimated parameters taken out of the degrees of
    /// freedom.
    pub fn rmse_dof_corrected(&self) -> f64 {
        (self.final_cost / (self.residual_count as f64 - 12.0)).sqrt()
    }
}

struct HandEyeProblem<'a> {
    sets: &'a [MeasurementSet],
    board: &'a TargetBoard,
    k: &'a CameraIntrinsics,
}

impl LeastSquares<12> for HandEyeProblem<'_> {
    type Params = CalibrationParams;

    fn normal_equations(&self, x: &CalibrationParams) -> Result<(Matrix12, Vector12, f64)> {
        normal_equations(x, self.sets, self.board, self.k)
    }

    fn cost(&self, x: &CalibrationParams) -> Result<f64> {
        total_cost(x, self.sets, self.board, self.k)
    }

    fn retract(&self, x: &CalibrationParams, delta: &Vector12) -> CalibrationParams {
        x.perturbed(delta)
    }
}

/// Minimizes the summed squared reprojection error over all measurement sets
/// with Levenberg-Marquardt, updating `T <- exp(delta) T` for each transform.
///
/// Hitting `max_iterations` is not an error; check
/// [`SolveReport::converged`] or call [`SolveReport::into_result`].
pub fn optimize(
    initial: &CalibrationParams,
    sets: &[MeasurementSet],
    board: &TargetBoard,
    k: &CameraIntrinsics,
    cfg: &SolverConfig,
) -> Result<SolveReport> {
    if sets.is_empty() {
        return Err(Error::InsufficientFrames { needed: 1, got: 0 });
    }
    let problem = HandEyeProblem { sets, board, k };
    let out = levenberg_marquardt(&problem, *initial, cfg)?;
    Ok(SolveReport {
        params: out.params,
        iterations: out.iterations,
        initial_cost: out.cost_trace[0],
        final_cost: *out.cost_trace.last().expect("trace is never empty"),
        cost_trace: out.cost_trace,
        convergence: out.convergence,
        residual_count: sets.iter().map(|s| 2 * s.len()).sum(),
    })
}
