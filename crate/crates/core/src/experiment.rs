//! Seeded comparison of view-selection policies on the simulated workcell.

use std::f64::consts::TAU;
use std::path::Path;

use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimator::{closed_form_init, optimize, solve_pnp, SolverConfig};
use crate::evaluation::{
    candidate_outcomes, mean_std, CandidateOutcome, pearson_correlation, MaxDistanceSelector, MetricsRecord, Policy, RandomSelector,
    Validation,
};
use crate::geom::Pose;
use crate::infogain::{
    run_active_calibration, ActiveReport, ActiveSetup, NbvSelector, SimulatedRobot, StopReason,
    ViewSelector, ViewSource,
};
use crate::io::ExperimentConfig;
use crate::sensing::{
    camera_look_at, generate_candidates, simulate_measurement_with, stream_rng, CandidateGeometry,
    CandidateSet, Scene,
};

const INIT_STREAM: u64 = 2 << 60;
const VALIDATION_POSE_STREAM: u64 = 3 << 60;
const VALIDATION_NOISE_STREAM: u64 = 4 << 60;
const POLICY_STREAM: u64 = 5 << 60;

/// Attempts at drawing initial views with non-parallel rotation axes.
const INIT_ATTEMPTS: usize = 1000;

/// Everything shared by the policies run under one seed.
pub struct SeedSetup {
    pub seed: u64,
    pub scene: Scene,
    pub candidates: CandidateSet,
    pub initial: Vec<usize>,
    pub validation: Validation,
}

impl SeedSetup {
    pub fn new(cfg: &ExperimentConfig, seed: u64) -> Result<Self> {
        let scene = cfg.scene.build()?;
        let geometry = cfg.candidates.build()?;
        let candidates = generate_candidates(&geometry, &scene)?;
        let initial = draw_initial_views(&scene, &candidates, cfg.nbv.initial_views, seed)?;
        let validation = draw_validation(&scene, &geometry, &candidates, cfg.validation_views, seed)?;
        Ok(SeedSetup {
            seed,
            scene,
            candidates,
            initial,
            validation,
        })
    }

    pub fn metrics(&self, theta: &crate::estimator::CalibrationParams) -> Result<MetricsRecord> {
        self.validation
            .metrics(theta, Some(&self.scene.truth), &self.scene.board, &self.scene.intrinsics)
    }

    /// Runs one policy from this seed's initial views.
    pub fn run(&self, cfg: &ExperimentConfig, policy: Policy) -> Result<ActiveReport<MetricsRecord>> {
        let solver = SolverConfig::default();
        let setup = ActiveSetup {
            board: &self.scene.board,
            intrinsics: &self.scene.intrinsics,
            candidates: &self.candidates,
            initial: &self.initial,
            solver: &solver,
        };
        let mut selector: Box<dyn ViewSelector> = match policy {
            Policy::Nbv => Box::new(NbvSelector::from_config(&cfg.nbv)),
            Policy::Random => Box::new(RandomSelector {
                rng: stream_rng(self.seed, POLICY_STREAM),
            }),
            Policy::MaxDistance => Box::new(MaxDistanceSelector {
                rule: cfg.distance_rule,
            }),
        };
        let mut robot = SimulatedRobot::new(self.scene.clone(), self.seed);
        run_active_calibration(&cfg.nbv, &setup, selector.as_mut(), &mut robot, |theta| {
            self.metrics(theta)
        })
    }
}

impl SeedSetup {
    /// Predicted gain against realized validation RMSE reduction for every
    /// candidate, starting from the state after the initial views.
    ///
    /// Each candidate is measured with the noise the selection loop would see
    /// if it picked that candidate as its first added view.
    pub fn initial_outcomes(&self) -> Result<Vec<CandidateOutcome>> {
        let (b, k) = (&self.scene.board, &self.scene.intrinsics);
        let mut robot = SimulatedRobot::new(self.scene.clone(), self.seed);
        let sets = self
            .initial
            .iter()
            .map(|&i| robot.measure(i, self.candidates.get(i).expect("in range")))
            .collect::<Result<Vec<_>>>()?;
        let cams = sets
            .iter()
            .map(|s| solve_pnp(b, &s.observations, k))
            .collect::<Result<Vec<Pose>>>()?;
        let robots: Vec<Pose> = sets.iter().map(|s| s.robot_pose).collect();
        let solver = SolverConfig::default();
        let theta = optimize(&closed_form_init(&cams, &robots)?, &sets, b, k, &solver)?.params;
        let measure = |i: usize, pose: &Pose| robot.clone().measure(i, pose);
        candidate_outcomes(&theta, &sets, &self.candidates, b, k, &solver, &self.validation, &measure)
    }
}

/// Distinct candidate indices whose exact camera poses give a
/// non-degenerate closed-form problem.
fn draw_initial_views(scene: &Scene, candidates: &CandidateSet, count: usize, seed: u64) -> Result<Vec<usize>> {
    if candidates.len() < count {
        return Err(Error::InvalidConfig(format!(
            "{} candidates cannot supply {count} initial views",
            candidates.len()
        )));
    }
    let mut rng = stream_rng(seed, INIT_STREAM);
    for _ in 0..INIT_ATTEMPTS {
        let picks = sample(&mut rng, candidates.len(), count).into_vec();
        let robots: Vec<Pose> = picks.iter().map(|&i| *candidates.get(i).expect("in range")).collect();
        let cams: Vec<Pose> = robots.iter().map(|r| scene.camera_from_world(r)).collect();
        if closed_form_init(&cams, &robots).is_ok() {
            return Ok(picks);
        }
    }
    Err(Error::DegenerateMotion(format!(
        "no non-degenerate set of {count} initial views found in {INIT_ATTEMPTS} draws"
    )))
}

/// Fully visible views at continuous random positions on the candidate caps,
/// so they never coincide with a candidate.
fn draw_validation(
    scene: &Scene,
    geometry: &CandidateGeometry,
    candidates: &CandidateSet,
    count: usize,
    seed: u64,
) -> Result<Validation> {
    let mut pose_rng = stream_rng(seed, VALIDATION_POSE_STREAM);
    let mut noise_rng = stream_rng(seed, VALIDATION_NOISE_STREAM);
    let mut sets = Vec::with_capacity(count);
    let mut attempts = 0;
    while sets.len() < count {
        attempts += 1;
        if attempts > 100 * count {
            return Err(Error::InvalidConfig("could not place validation views in the candidate region".into()));
        }
        let r = pose_rng.random_range(geometry.radius_min..=geometry.radius_max);
        let az = pose_rng.random_range(0.0..TAU);
        let el = pose_rng.random_range(geometry.elevation_min..=geometry.elevation_max);
        let robot = scene.robot_pose_for_camera(&camera_look_at(&nalgebra::Vector3::zeros(), r, az, el));
        if !scene.fully_visible(&robot) || candidates.iter().any(|c| *c == robot) {
            continue;
        }
        sets.push(simulate_measurement_with(scene, &robot, &mut noise_rng)?);
    }
    Validation::new(sets, &scene.board, &scene.intrinsics)
}

/// One CSV row: a (policy, seed, iteration) state.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunRow {
    pub policy: Policy,
    pub seed: u64,
    pub iteration: usize,
    pub entropy_nats: f64,
    pub predicted_ig_nats: Option<f64>,
    pub e_at_mm: Option<f64>,
    #[serde(rename = "e_aR_deg")]
    pub e_ar_deg: Option<f64>,
    pub e_rt_mm: f64,
    #[serde(rename = "e_rR_deg")]
    pub e_rr_deg: f64,
    pub e_rmse_px: f64,
    pub candidate: Option<usize>,
    pub e_rmse_frame_px: f64,
    pub train_rmse_px: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunOutcome {
    pub policy: Policy,
    pub seed: u64,
    pub added_views: usize,
    pub visited: Vec<usize>,
    pub stop: String,
}

/// Predicted gain of an NBV step against the validation RMSE it bought.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScatterPoint {
    pub seed: u64,
    pub iteration: usize,
    pub candidate: usize,
    pub predicted_ig_nats: f64,
    pub rmse_reduction_px: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    fn of(values: &[f64]) -> Self {
        let (mean, std) = mean_std(values);
        MeanStd { mean, std }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SummaryRow {
    pub policy: Policy,
    pub iteration: usize,
    pub runs: usize,
    pub entropy_nats: MeanStd,
    pub e_at_mm: MeanStd,
    #[serde(rename = "e_aR_deg")]
    pub e_ar_deg: MeanStd,
    pub e_rt_mm: MeanStd,
    #[serde(rename = "e_rR_deg")]
    pub e_rr_deg: MeanStd,
    pub e_rmse_px: MeanStd,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub rows: Vec<RunRow>,
    pub runs: Vec<RunOutcome>,
    pub scatter: Vec<ScatterPoint>,
    pub summary: Vec<SummaryRow>,
    /// Correlation over `scatter`, when it has enough spread.
    pub nbv_scatter_pearson: Option<f64>,
}

impl ExperimentReport {
    /// Summary row of `policy` at `iteration`.
    pub fn summary_at(&self, policy: Policy, iteration: usize) -> Option<&SummaryRow> {
        self.summary
            .iter()
            .find(|s| s.policy == policy && s.iteration == iteration)
    }
}

/// Runs every (policy, seed) pair. All policies under a seed share the scene,
/// initial views, validation views and measurement noise.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let setups: Vec<SeedSetup> = cfg
        .seeds
        .par_iter()
        .map(|&s| SeedSetup::new(cfg, s).map_err(|e| e.context(format!("seed {s}"))))
        .collect::<Result<_>>()?;
    let jobs: Vec<(Policy, &SeedSetup)> = cfg
        .policies
        .iter()
        .flat_map(|&p| setups.iter().map(move |s| (p, s)))
        .collect();
    let reports: Vec<ActiveReport<MetricsRecord>> = jobs
        .par_iter()
        .map(|(p, s)| {
            s.run(cfg, *p)
                .map_err(|e| e.context(format!("policy {}, seed {}", p.name(), s.seed)))
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    let mut runs = Vec::new();
    let mut scatter = Vec::new();
    for ((policy, setup), report) in jobs.iter().zip(&reports) {
        for r in &report.records {
            rows.push(RunRow {
                policy: *policy,
                seed: setup.seed,
                iteration: r.iteration,
                entropy_nats: r.entropy,
                predicted_ig_nats: r.predicted_gain,
                e_at_mm: r.metrics.e_at_mm,
                e_ar_deg: r.metrics.e_ar_deg,
                e_rt_mm: r.metrics.e_rt_mm,
                e_rr_deg: r.metrics.e_rr_deg,
                e_rmse_px: r.metrics.e_rmse_px,
                candidate: r.chosen,
                e_rmse_frame_px: r.metrics.e_rmse_frame_px,
                train_rmse_px: r.train_rmse,
            });
        }
        if *policy == Policy::Nbv {
            for w in report.records.windows(2) {
                scatter.push(ScatterPoint {
                    seed: setup.seed,
                    iteration: w[1].iteration,
                    candidate: w[1].chosen.expect("added views have a candidate"),
                    predicted_ig_nats: w[1].predicted_gain.expect("added views have a gain"),
                    rmse_reduction_px: w[0].metrics.e_rmse_px - w[1].metrics.e_rmse_px,
                });
            }
        }
        runs.push(RunOutcome {
            policy: *policy,
            seed: setup.seed,
            added_views: report.added_views(),
            visited: report.visited.clone(),
            stop: match &report.stop {
                StopReason::GainBelowThreshold => "gain_below_threshold".into(),
                StopReason::ViewBudget => "view_budget".into(),
                StopReason::Failed(m) => format!("failed: {m}"),
            },
        });
    }
    let summary = summarize(&cfg.policies, &rows);
    let x: Vec<f64> = scatter.iter().map(|p| p.predicted_ig_nats).collect();
    let y: Vec<f64> = scatter.iter().map(|p| p.rmse_reduction_px).collect();
    Ok(ExperimentReport {
        rows,
        runs,
        scatter,
        summary,
        nbv_scatter_pearson: pearson_correlation(&x, &y).ok(),
    })
}

fn summarize(policies: &[Policy], rows: &[RunRow]) -> Vec<SummaryRow> {
    let mut out = Vec::new();
    for &policy in policies {
        let max_iter = rows
            .iter()
            .filter(|r| r.policy == policy)
            .map(|r| r.iteration)
            .max()
            .unwrap_or(0);
        for iteration in 0..=max_iter {
            let sel: Vec<&RunRow> = rows
                .iter()
                .filter(|r| r.policy == policy && r.iteration == iteration)
                .collect();
            if sel.is_empty() {
                continue;
            }
            let col = |f: &dyn Fn(&RunRow) -> f64| MeanStd::of(&sel.iter().map(|r| f(r)).collect::<Vec<_>>());
            out.push(SummaryRow {
                policy,
                iteration,
                runs: sel.len(),
                entropy_nats: col(&|r| r.entropy_nats),
                e_at_mm: col(&|r| r.e_at_mm.unwrap_or(f64::NAN)),
                e_ar_deg: col(&|r| r.e_ar_deg.unwrap_or(f64::NAN)),
                e_rt_mm: col(&|r| r.e_rt_mm),
                e_rr_deg: col(&|r| r.e_rr_deg),
                e_rmse_px: col(&|r| r.e_rmse_px),
            });
        }
    }
    out
}

fn csv_string<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::from(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Per-iteration curves, one row per (policy, seed, iteration).
pub fn runs_csv(report: &ExperimentReport) -> Result<String> {
    csv_string(&report.rows)
}

pub fn scatter_csv(report: &ExperimentReport) -> Result<String> {
    csv_string(&report.scatter)
}

#[derive(Serialize)]
struct SummaryFile<'a> {
    summary: &'a [SummaryRow],
    runs: &'a [RunOutcome],
    nbv_scatter_pearson: Option<f64>,
}

pub fn summary_json(report: &ExperimentReport) -> String {
    crate::io::to_json(&SummaryFile {
        summary: &report.summary,
        runs: &report.runs,
        nbv_scatter_pearson: report.nbv_scatter_pearson,
    })
}

/// Writes the CSV curves, the scatter pairs and the JSON summary.
pub fn write_report(report: &ExperimentReport, cfg: &ExperimentConfig, out_dir: &Path) -> Result<()> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::from(e).context(out_dir.display().to_string()))?;
    let o = &cfg.outputs;
    crate::io::write_text(&out_dir.join(&o.runs_csv), &runs_csv(report)?)?;
    crate::io::write_text(&out_dir.join(&o.scatter_csv), &scatter_csv(report)?)?;
    crate::io::write_text(&out_dir.join(&o.summary_json), &summary_json(report))?;
    Ok(())
}
