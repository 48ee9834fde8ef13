//! Command implementations behind the `active-handeye` binary.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::estimator::{closed_form_init, optimize, solve_pnp, CalibrationParams, SolveReport, SolverConfig};
use crate::infogain::{select_nbv, CandidateScore, InfoState};
use crate::io::{save_candidates, save_dataset, CalibrationSpec, Dataset, ExperimentConfig};
use crate::sensing::{simulate_measurement, CandidateSet};

/// Closed-form initialization followed by least-squares refinement.
pub struct Calibration {
    pub solve: SolveReport,
    pub info: InfoState,
}

pub fn calibrate_dataset(d: &Dataset, solver: &SolverConfig) -> Result<Calibration> {
    if d.sets.len() < 3 {
        return Err(Error::InsufficientFrames {
            needed: 3,
            got: d.sets.len(),
        });
    }
    let cams = d
        .sets
        .iter()
        .enumerate()
        .map(|(i, s)| solve_pnp(&d.board, &s.observations, &d.intrinsics).map_err(|e| e.context(format!("set {i}"))))
        .collect::<Result<Vec<_>>>()?;
    let robots: Vec<_> = d.sets.iter().map(|s| s.robot_pose).collect();
    let init = closed_form_init(&cams, &robots)?;
    let solve = optimize(&init, &d.sets, &d.board, &d.intrinsics, solver)?;
    let info = InfoState::from_sets(&solve.params, &d.sets, &d.board, &d.intrinsics, 1.0)?;
    Ok(Calibration { solve, info })
}

pub fn format_calibration(c: &Calibration) -> String {
    let spec = CalibrationSpec::of(&c.solve.params);
    let mut s = String::new();
    let pose = |name: &str, p: &crate::io::PoseSpec, s: &mut String| {
        let q = p.quaternion;
        let t = p.translation;
        writeln!(
            s,
            "{name}: q(w,x,y,z) = [{:.9}, {:.9}, {:.9}, {:.9}]  t(m) = [{:.6}, {:.6}, {:.6}]",
            q[0], q[1], q[2], q[3], t[0], t[1], t[2]
        )
        .unwrap();
    };
    pose("T_ce", &spec.t_ce, &mut s);
    pose("T_bw", &spec.t_bw, &mut s);
    let std = c.info.std_devs();
    writeln!(s, "entropy_nats: {:.6}", c.info.entropy).unwrap();
    writeln!(
        s,
        "rmse_px: {:.6}  iterations: {}  convergence: {:?}",
        c.solve.rmse(),
        c.solve.iterations,
        c.solve.convergence
    )
    .unwrap();
    writeln!(
        s,
        "std (unit pixel noise): t_ce {:.3e} {:.3e} {:.3e} m, r_ce {:.3e} {:.3e} {:.3e} rad",
        std[0], std[1], std[2], std[3], std[4], std[5]
    )
    .unwrap();
    s
}

/// Candidate scores sorted by gain, highest first (ties by index).
pub fn rank_candidates(
    theta: &CalibrationParams,
    info: &InfoState,
    d: &Dataset,
    candidates: &CandidateSet,
) -> Result<Vec<CandidateScore>> {
    let (_, mut scores) = select_nbv(theta, info, candidates, &[], &d.board, &d.intrinsics)?;
    scores.sort_by(|a, b| {
        b.information_gain
            .total_cmp(&a.information_gain)
            .then(a.index.cmp(&b.index))
    });
    Ok(scores)
}

pub fn format_ranking(entropy_before: f64, scores: &[CandidateScore]) -> String {
    let mut s = String::from("rank,candidate,ig_nats,entropy_before_nats,entropy_after_nats\n");
    for (rank, c) in scores.iter().enumerate() {
        writeln!(
            s,
            "{},{},{},{},{}",
            rank + 1,
            c.index,
            c.information_gain,
            entropy_before,
            c.predicted_entropy
        )
        .unwrap();
    }
    s
}

/// Writes `config.json`, `candidates.json` and a `dataset.json` holding the
/// initial views of `seed` into `out_dir`.
pub fn make_scene(cfg: &ExperimentConfig, seed: u64, out_dir: &Path) -> Result<()> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::from(e).context(out_dir.display().to_string()))?;
    cfg.save(&out_dir.join("config.json"))?;
    let setup = crate::experiment::SeedSetup::new(cfg, seed)?;
    save_candidates(&out_dir.join("candidates.json"), &setup.candidates)?;
    let sets = setup
        .initial
        .iter()
        .map(|&i| simulate_measurement(&setup.scene, setup.candidates.get(i).expect("in range"), seed ^ i as u64))
        .collect::<Result<Vec<_>>>()?;
    save_dataset(
        &out_dir.join("dataset.json"),
        &Dataset {
            intrinsics: setup.scene.intrinsics,
            board: setup.scene.board.clone(),
            sets,
        },
    )
}
