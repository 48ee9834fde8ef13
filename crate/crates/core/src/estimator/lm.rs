use nalgebra::{SMatrix, SVector};

use super::{Convergence, SolverConfig};
use crate::error::{Error, Result};

/// A dense least-squares problem over an `N`-dimensional tangent space.
pub(crate) trait LeastSquares<const N: usize> {
    type Params: Clone;

    /// `(J^T J, J^T r, sum r^2)` at `x`, with `J = dr/dx`.
    fn normal_equations(
        &self,
        x: &Self::Params,
    ) -> Result<(SMatrix<f64, N, N>, SVector<f64, N>, f64)>;

    /// `sum r^2` at `x`.
    fn cost(&self, x: &Self::Params) -> Result<f64>;

    /// Applies a tangent-space step.
    fn retract(&self, x: &Self::Params, delta: &SVector<f64, N>) -> Self::Params;
}

pub(crate) struct LmOutcome<P> {
    pub params: P,
    pub iterations: usize,
    pub cost_trace: Vec<f64>,
    pub convergence: Convergence,
}

/// Levenberg-Marquardt with Marquardt diagonal scaling. Only steps that lower
/// the cost are accepted, so `cost_trace` is strictly decreasing.
pub(crate) fn levenberg_marquardt<const N: usize, P: LeastSquares<N>>(
    problem: &P,
    x0: P::Params,
    cfg: &SolverConfig,
) -> Result<LmOutcome<P::Params>> {
    let mut x = x0;
    let (mut h, mut g, mut cost) = problem.normal_equations(&x)?;
    let mut trace = vec![cost];
    let mut lambda = cfg.initial_damping;
    let mut iterations = 0;

    let convergence = 'outer: loop {
        if cost <= cfg.cost_abs_tolerance {
            break Convergence::CostBelowTolerance;
        }
        if iterations >= cfg.max_iterations {
            break Convergence::MaxIterations;
        }
        iterations += 1;

        let max_diag = h.diagonal().max();
        if !(max_diag > 0.0 && max_diag.is_finite()) {
            return Err(Error::SingularSystem);
        }
        let floor = max_diag * 1e-12;
        loop {
            let mut damped = h;
            for i in 0..N {
                damped[(i, i)] += lambda * h[(i, i)].max(floor);
            }
            let Some(chol) = damped.cholesky() else {
                lambda *= cfg.damping_increase;
                if lambda > cfg.max_damping {
                    return Err(Error::SingularSystem);
                }
                continue;
            };
            let delta = chol.solve(&(-g));
            if delta.norm() < cfg.step_tolerance {
                break 'outer Convergence::SmallStep;
            }
            let candidate = problem.retract(&x, &delta);
            let new_cost = problem.cost(&candidate).unwrap_or(f64::INFINITY);
            if new_cost < cost {
                let rel = (cost - new_cost) / cost;
                x = candidate;
                (h, g, cost) = problem.normal_equations(&x)?;
                trace.push(cost);
                lambda = (lambda / cfg.damping_decrease).max(1e-20);
                if rel < cfg.cost_rel_tolerance {
                    break 'outer Convergence::RelativeCostDecrease;
                }
                break;
            }
            lambda *= cfg.damping_increase;
            if lambda > cfg.max_damping {
                break 'outer Convergence::DampingSaturated;
            }
        }
    };

    Ok(LmOutcome {
        params: x,
        iterations,
        cost_trace: trace,
        convergence,
    })
}
