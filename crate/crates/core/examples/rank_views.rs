//! Scores every candidate view by predicted information gain from a
//! three-view estimate and lists the top five.
//!
//! `cargo run --release --example rank_views`

use active_handeye::estimator::{closed_form_init, optimize, solve_pnp, SolverConfig};
use active_handeye::geom::Pose;
use active_handeye::infogain::{select_nbv, InfoState};
use active_handeye::sensing::{
    generate_candidates, simulate_measurement, CandidateGeometry, NoiseModel, Scene,
};

fn main() -> active_handeye::Result<()> {
    let scene = Scene::default_workcell(NoiseModel::default());
    let candidates = generate_candidates(&CandidateGeometry::default(), &scene)?;
    let visited = vec![2, 21, 40];
    let sets = visited
        .iter()
        .map(|&i| simulate_measurement(&scene, candidates.get(i).expect("in range"), i as u64))
        .collect::<active_handeye::Result<Vec<_>>>()?;

    let (b, k) = (&scene.board, &scene.intrinsics);
    let cams = sets
        .iter()
        .map(|s| solve_pnp(b, &s.observations, k))
        .collect::<active_handeye::Result<Vec<Pose>>>()?;
    let robots: Vec<Pose> = sets.iter().map(|s| s.robot_pose).collect();
    let theta = optimize(&closed_form_init(&cams, &robots)?, &sets, b, k, &SolverConfig::default())?.params;
    let info = InfoState::from_sets(&theta, &sets, b, k, 1.0)?;

    let (best, mut scores) = select_nbv(&theta, &info, &candidates, &visited, b, k)?;
    scores.sort_by(|a, b| b.information_gain.total_cmp(&a.information_gain));
    println!("entropy with views {visited:?}: {:.2} nats", info.entropy);
    for s in scores.iter().take(5) {
        println!("candidate {:>2}: gain {:.3} nats", s.index, s.information_gain);
    }
    println!("next best view: {best}");
    Ok(())
}
