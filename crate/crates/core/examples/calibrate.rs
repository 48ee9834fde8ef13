//! Batch calibration on six simulated views: PnP per view, closed-form
//! initialization, then nonlinear refinement against the ground truth.
//!
//! `cargo run --release --example calibrate`

use active_handeye::estimator::{closed_form_init, optimize, solve_pnp, SolverConfig};
use active_handeye::evaluation::absolute_errors;
use active_handeye::geom::Pose;
use active_handeye::infogain::InfoState;
use active_handeye::sensing::{
    generate_candidates, simulate_measurement, CandidateGeometry, NoiseModel, Scene,
};

fn main() -> active_handeye::Result<()> {
    let scene = Scene::default_workcell(NoiseModel::default());
    let candidates = generate_candidates(&CandidateGeometry::default(), &scene)?;
    let views = [0, 9, 18, 27, 36, 45];
    let sets = views
        .iter()
        .map(|&i| simulate_measurement(&scene, candidates.get(i).expect("in range"), i as u64))
        .collect::<active_handeye::Result<Vec<_>>>()?;

    let (b, k) = (&scene.board, &scene.intrinsics);
    let cams = sets
        .iter()
        .map(|s| solve_pnp(b, &s.observations, k))
        .collect::<active_handeye::Result<Vec<Pose>>>()?;
    let robots: Vec<Pose> = sets.iter().map(|s| s.robot_pose).collect();
    let init = closed_form_init(&cams, &robots)?;
    let report = optimize(&init, &sets, b, k, &SolverConfig::default())?.into_result()?;

    for (name, theta) in [("closed form", &init), ("refined", &report.params)] {
        let (ce_mm, ce_deg) = absolute_errors(&theta.t_ce, &scene.truth.t_ce);
        let (bw_mm, bw_deg) = absolute_errors(&theta.t_bw, &scene.truth.t_bw);
        println!("{name:>12}: T_ce {ce_mm:.3} mm {ce_deg:.4} deg, T_bw {bw_mm:.3} mm {bw_deg:.4} deg");
    }
    let info = InfoState::from_sets(&report.params, &sets, b, k, 1.0)?;
    println!(
        "{} LM iterations, RMSE {:.3} px, entropy {:.2} nats",
        report.iterations,
        report.rmse(),
        info.entropy
    );
    Ok(())
}
