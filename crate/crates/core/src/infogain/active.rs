use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{predict_information_gain, score_candidates, InfoState};
use crate::error::{Error, Result};
use crate::estimator::{closed_form_init, optimize, solve_pnp, CalibrationParams, Convergence, SolverConfig};
use crate::geom::Pose;
use crate::sensing::{
    simulate_measurement_with, stream_rng, CameraIntrinsics, CandidateSet, MeasurementSet, Scene,
    TargetBoard,
};

/// Stream tag of the measurement noise drawn at candidate views.
const CANDIDATE_STREAM: u64 = 1 << 60;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NbvConfig {
    /// Views collected before the first optimization (at least 3).
    pub initial_views: usize,
    /// Views added by the selection loop at most.
    pub max_views: usize,
    /// Stop once the selected view's predicted gain falls below this, nats.
    pub gain_threshold: f64,
    /// Score at most this many eligible candidates (lowest indices first).
    pub candidate_budget: Option<usize>,
    pub exclude_visited: bool,
    /// Pixel sigma used to scale the reported covariance and entropy.
    pub entropy_sigma: Option<f64>,
}

impl Default for NbvConfig {
    fn default() -> Self {
        NbvConfig {
            initial_views: 3,
            max_views: 5,
            gain_threshold: 0.0,
            candidate_budget: None,
            exclude_visited: false,
            entropy_sigma: None,
        }
    }
}

impl NbvConfig {
    pub fn validate(&self) -> Result<()> {
        if self.initial_views < 3 {
            return Err(Error::InvalidConfig(format!(
                "need at least 3 initial views, got {}",
                self.initial_views
            )));
        }
        if self.gain_threshold.is_nan() || self.gain_threshold < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "gain threshold must be >= 0, got {}",
                self.gain_threshold
            )));
        }
        if self.candidate_budget == Some(0) {
            return Err(Error::InvalidConfig("candidate budget must be positive".into()));
        }
        if let Some(s) = self.entropy_sigma {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::InvalidConfig(format!("entropy sigma must be positive, got {s}")));
            }
        }
        Ok(())
    }

    fn sigma(&self) -> f64 {
        self.entropy_sigma.unwrap_or(1.0)
    }
}

/// What a selection policy gets to look at.
pub struct SelectionContext<'a> {
    pub params: &'a CalibrationParams,
    pub info: &'a InfoState,
    pub candidates: &'a CandidateSet,
    /// Candidate indices measured so far, in collection order, including the
    /// initial views.
    pub visited: &'a [usize],
    pub board: &'a TargetBoard,
    pub intrinsics: &'a CameraIntrinsics,
}

pub trait ViewSelector {
    fn select(&mut self, ctx: &SelectionContext<'_>) -> Result<usize>;
}

/// Greedy information-gain maximization over the candidate set.
#[derive(Clone, Copy, Debug, Default)]
pub struct NbvSelector {
    pub exclude_visited: bool,
    pub candidate_budget: Option<usize>,
}

impl NbvSelector {
    pub fn from_config(cfg: &NbvConfig) -> Self {
        NbvSelector {
            exclude_visited: cfg.exclude_visited,
            candidate_budget: cfg.candidate_budget,
        }
    }
}

impl ViewSelector for NbvSelector {
    fn select(&mut self, ctx: &SelectionContext<'_>) -> Result<usize> {
        let eligible: Vec<usize> = (0..ctx.candidates.len())
            .filter(|i| !(self.exclude_visited && ctx.visited.contains(i)))
            .take(self.candidate_budget.unwrap_or(usize::MAX))
            .collect();
        if eligible.is_empty() {
            return Err(Error::Exhausted);
        }
        let (best, _) = score_candidates(
            ctx.params,
            ctx.info,
            ctx.candidates,
            &eligible,
            ctx.board,
            ctx.intrinsics,
        )?;
        Ok(best)
    }
}

/// Something that moves the robot to a candidate pose and captures a
/// measurement set there.
pub trait ViewSource {
    fn measure(&mut self, index: usize, robot_pose: &Pose) -> Result<MeasurementSet>;
}

/// Simulated robot whose noise at each candidate depends only on the seed,
/// the candidate index and how often that candidate was visited. Two policies
/// that visit the same candidate therefore see the same measurement.
#[derive(Clone, Debug)]
pub struct SimulatedRobot {
    pub scene: Scene,
    pub seed: u64,
    visits: HashMap<usize, u64>,
}

impl SimulatedRobot {
    pub fn new(scene: Scene, seed: u64) -> Self {
        SimulatedRobot {
            scene,
            seed,
            visits: HashMap::new(),
        }
    }
}

impl ViewSource for SimulatedRobot {
    fn measure(&mut self, index: usize, robot_pose: &Pose) -> Result<MeasurementSet> {
        let n = self.visits.entry(index).or_insert(0);
        let stream = CANDIDATE_STREAM | ((index as u64) << 20) | *n;
        *n += 1;
        let mut rng = stream_rng(self.seed, stream);
        simulate_measurement_with(&self.scene, robot_pose, &mut rng)
    }
}

/// One pass of the loop. Iteration 0 is the state after the initial views.
#[derive(Clone, Debug, PartialEq)]
pub struct IterationRecord<M> {
    pub iteration: usize,
    pub params: CalibrationParams,
    pub entropy: f64,
    /// Candidate added in this iteration.
    pub chosen: Option<usize>,
    pub chosen_pose: Option<Pose>,
    /// Gain predicted for the chosen view before it was measured, nats.
    pub predicted_gain: Option<f64>,
    pub solver_iterations: usize,
    pub convergence: Convergence,
    /// Per-component reprojection RMSE on the collected sets, px.
    pub train_rmse: f64,
    pub metrics: M,
}

#[derive(Clone, Debug, PartialEq)]
pub enum StopReason {
    /// The predicted gain dropped below the threshold.
    GainBelowThreshold,
    /// The configured number of views was added.
    ViewBudget,
    /// A later iteration failed; earlier records are kept.
    Failed(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ActiveReport<M> {
    pub records: Vec<IterationRecord<M>>,
    pub visited: Vec<usize>,
    pub stop: StopReason,
}

impl<M> ActiveReport<M> {
    pub fn last(&self) -> &IterationRecord<M> {
        self.records.last().expect("report holds the initial iteration")
    }

    pub fn added_views(&self) -> usize {
        self.records.len() - 1
    }
}

/// Static inputs of the loop.
#[derive(Clone, Copy)]
pub struct ActiveSetup<'a> {
    pub board: &'a TargetBoard,
    pub intrinsics: &'a CameraIntrinsics,
    pub candidates: &'a CandidateSet,
    /// Candidate indices measured before the first optimization.
    pub initial: &'a [usize],
    pub solver: &'a SolverConfig,
}

/// Active calibration loop.
///
/// Measures the initial views, initializes in closed form from per-view PnP
/// poses and refines by least squares. Then, until the view budget is spent
/// or the selected view's predicted gain drops below the threshold: score
/// candidates, move to the selected one, measure, re-optimize from the
/// previous estimate and record the new entropy.
///
/// `evaluate` is called on the estimate after every iteration. Failures after
/// the initial iteration end the loop and are reported in
/// [`ActiveReport::stop`].
pub fn run_active_calibration<M>(
    cfg: &NbvConfig,
    setup: &ActiveSetup<'_>,
    selector: &mut dyn ViewSelector,
    source: &mut dyn ViewSource,
    mut evaluate: impl FnMut(&CalibrationParams) -> Result<M>,
) -> Result<ActiveReport<M>> {
    cfg.validate()?;
    if setup.initial.len() != cfg.initial_views {
        return Err(Error::InvalidConfig(format!(
            "{} initial views given, config asks for {}",
            setup.initial.len(),
            cfg.initial_views
        )));
    }
    let (board, k, candidates) = (setup.board, setup.intrinsics, setup.candidates);
    let pose_of = |i: usize| {
        candidates
            .get(i)
            .copied()
            .ok_or_else(|| Error::InvariantViolation(format!("candidate index {i} out of range")))
    };

    let mut sets = Vec::with_capacity(cfg.initial_views + cfg.max_views);
    let mut visited = Vec::with_capacity(sets.capacity());
    for &i in setup.initial {
        sets.push(source.measure(i, &pose_of(i)?)?);
        visited.push(i);
    }
    let cameras = sets
        .iter()
        .map(|s| solve_pnp(board, &s.observations, k))
        .collect::<Result<Vec<_>>>()?;
    let robots: Vec<Pose> = sets.iter().map(|s| s.robot_pose).collect();
    let init = closed_form_init(&cameras, &robots)?;
    let solve = optimize(&init, &sets, board, k, setup.solver)?;
    let mut info = InfoState::from_sets(&solve.params, &sets, board, k, cfg.sigma())?;
    let mut records = vec![IterationRecord {
        iteration: 0,
        params: solve.params,
        entropy: info.entropy,
        chosen: None,
        chosen_pose: None,
        predicted_gain: None,
        solver_iterations: solve.iterations,
        convergence: solve.convergence,
        train_rmse: solve.rmse(),
        metrics: evaluate(&solve.params)?,
    }];

    let mut stop = StopReason::ViewBudget;
    for iteration in 1..=cfg.max_views {
        let params = records.last().expect("non-empty").params;
        let step = (|| -> Result<Option<IterationRecord<M>>> {
            let ctx = SelectionContext {
                params: &params,
                info: &info,
                candidates,
                visited: &visited,
                board,
                intrinsics: k,
            };
            let chosen = selector.select(&ctx)?;
            let gain = predict_information_gain(&params, &info, candidates, chosen, board, k)?
                .information_gain;
            if gain < cfg.gain_threshold {
                return Ok(None);
            }
            let pose = pose_of(chosen)?;
            sets.push(source.measure(chosen, &pose)?);
            visited.push(chosen);
            let solve = optimize(&params, &sets, board, k, setup.solver)?;
            info = InfoState::from_sets(&solve.params, &sets, board, k, cfg.sigma())?;
            Ok(Some(IterationRecord {
                iteration,
                params: solve.params,
                entropy: info.entropy,
                chosen: Some(chosen),
                chosen_pose: Some(pose),
                predicted_gain: Some(gain),
                solver_iterations: solve.iterations,
                convergence: solve.convergence,
                train_rmse: solve.rmse(),
                metrics: evaluate(&solve.params)?,
            }))
        })();
        match step {
            Ok(Some(r)) => records.push(r),
            Ok(None) => {
                stop = StopReason::GainBelowThreshold;
                break;
            }
            Err(e) => {
                stop = StopReason::Failed(e.context(format!("iteration {iteration}")).to_string());
                break;
            }
        }
    }
    Ok(ActiveReport {
        records,
        visited,
        stop,
    })
}
