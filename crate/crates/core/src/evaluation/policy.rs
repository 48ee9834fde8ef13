use nalgebra::Vector3;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Pose;
use crate::infogain::{SelectionContext, ViewSelector};
use crate::sensing::CandidateSet;

/// View-selection strategy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Policy {
    /// Maximize predicted information gain.
    Nbv,
    /// Uniform over unvisited candidates.
    Random,
    /// Farthest end-effector position from the visited ones.
    MaxDistance,
}

impl Policy {
    pub fn name(&self) -> &'static str {
        match self {
            Policy::Nbv => "nbv",
            Policy::Random => "random",
            Policy::MaxDistance => "max_distance",
        }
    }
}

impl std::str::FromStr for Policy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nbv" => Ok(Policy::Nbv),
            "random" => Ok(Policy::Random),
            "max_distance" => Ok(Policy::MaxDistance),
            other => Err(Error::InvalidConfig(format!(
                "unknown policy {other:?} (expected nbv, random or max_distance)"
            ))),
        }
    }
}

/// How distances to several visited positions are combined.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceRule {
    /// Maximize the distance to the nearest visited position.
    #[default]
    MaxMin,
    /// Maximize the summed distance to all visited positions.
    MaxSum,
}

/// End-effector origin in base coordinates for a robot pose `T_eb`.
pub fn end_effector_position(robot_pose: &Pose) -> Vector3<f64> {
    robot_pose.inverse().translation
}

fn unvisited(count: usize, visited: &[usize]) -> Vec<usize> {
    (0..count).filter(|i| !visited.contains(i)).collect()
}

/// Uniformly random unvisited candidate.
pub fn policy_random(candidate_count: usize, visited: &[usize], rng: &mut impl Rng) -> Result<usize> {
    let open = unvisited(candidate_count, visited);
    if open.is_empty() {
        return Err(Error::Exhausted);
    }
    Ok(open[rng.random_range(0..open.len())])
}

/// Unvisited candidate whose end-effector position is farthest from the
/// visited ones under `rule`; the lowest index wins ties.
pub fn policy_max_distance(candidates: &CandidateSet, visited: &[usize], rule: DistanceRule) -> Result<usize> {
    let positions: Vec<Vector3<f64>> = candidates.iter().map(end_effector_position).collect();
    let visited_positions: Vec<Vector3<f64>> = visited
        .iter()
        .map(|&i| {
            positions
                .get(i)
                .copied()
                .ok_or_else(|| Error::InvariantViolation(format!("visited index {i} out of range")))
        })
        .collect::<Result<_>>()?;
    farthest_position(&positions, &visited_positions, visited, rule)
}

/// Index into `positions` (skipping `excluded`) that maximizes the combined
/// distance to `visited`.
pub fn farthest_position(
    positions: &[Vector3<f64>],
    visited: &[Vector3<f64>],
    excluded: &[usize],
    rule: DistanceRule,
) -> Result<usize> {
    if visited.is_empty() {
        return Err(Error::InvariantViolation("max-distance policy needs a visited position".into()));
    }
    let mut best: Option<(usize, f64)> = None;
    for i in unvisited(positions.len(), excluded) {
        let d = visited.iter().map(|v| (positions[i] - v).norm());
        let score = match rule {
            DistanceRule::MaxMin => d.fold(f64::INFINITY, f64::min),
            DistanceRule::MaxSum => d.sum(),
        };
        if best.is_none_or(|(_, b)| score > b) {
            best = Some((i, score));
        }
    }
    best.map(|(i, _)| i).ok_or(Error::Exhausted)
}

pub struct RandomSelector {
    pub rng: ChaCha8Rng,
}

impl ViewSelector for RandomSelector {
    fn select(&mut self, ctx: &SelectionContext<'_>) -> Result<usize> {
        policy_random(ctx.candidates.len(), ctx.visited, &mut self.rng)
    }
}

pub struct MaxDistanceSelector {
    pub rule: DistanceRule,
}

impl ViewSelector for MaxDistanceSelector {
    fn select(&mut self, ctx: &SelectionContext<'_>) -> Result<usize> {
        policy_max_distance(ctx.candidates, ctx.visited, self.rule)
    }
}
