use std::path::Path;
use std::process::{Command, Output};

use active_handeye::cli::{calibrate_dataset, rank_candidates};
use active_handeye::estimator::SolverConfig;
use active_handeye::io::{load_candidates, load_dataset, save_candidates};
use active_handeye::sensing::CandidateSet;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_active-handeye"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn scene(dir: &Path) {
    stdout(&bin(&["make-scene", "--seed", "1", "--out-dir", dir.to_str().unwrap()]));
}

#[test]
fn make_scene_then_calibrate() {
    let dir = tempfile::tempdir().unwrap();
    scene(dir.path());
    for f in ["config.json", "candidates.json", "dataset.json"] {
        assert!(dir.path().join(f).exists(), "{f} missing");
    }
    let text = stdout(&bin(&["calibrate", "--dataset", dir.path().join("dataset.json").to_str().unwrap()]));
    assert!(text.starts_with("T_ce: q(w,x,y,z)"));
    assert!(text.contains("T_bw: q(w,x,y,z)"));
    assert!(text.contains("entropy_nats:"));
}

#[test]
fn nbv_rank_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    scene(dir.path());
    let dataset = dir.path().join("dataset.json");
    let candidates = dir.path().join("candidates.json");
    let text = stdout(&bin(&[
        "nbv-rank",
        "--dataset",
        dataset.to_str().unwrap(),
        "--candidates",
        candidates.to_str().unwrap(),
    ]));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "rank,candidate,ig_nats,entropy_before_nats,entropy_after_nats");
    assert_eq!(lines.len(), 49);

    let d = load_dataset(&dataset).unwrap();
    let c = load_candidates(&candidates).unwrap();
    let cal = calibrate_dataset(&d, &SolverConfig::default()).unwrap();
    let ranked = rank_candidates(&cal.solve.params, &cal.info, &d, &c).unwrap();
    let top: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(top[1].parse::<usize>().unwrap(), ranked[0].index);
    assert_eq!(top[2].parse::<f64>().unwrap(), ranked[0].information_gain);

    // A file holding only that candidate ranks it first with the same gain.
    let single = dir.path().join("single.json");
    save_candidates(&single, &CandidateSet::new(vec![*c.get(ranked[0].index).unwrap()])).unwrap();
    let text = stdout(&bin(&[
        "nbv-rank",
        "--dataset",
        dataset.to_str().unwrap(),
        "--candidates",
        single.to_str().unwrap(),
    ]));
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[..2], ["1", "0"]);
    assert_eq!(row[2].parse::<f64>().unwrap(), ranked[0].information_gain);
}

#[test]
fn simulate_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let status = bin(&["simulate", "--seed", "3", "--policy", "random", "--out-dir", out.to_str().unwrap()]);
    stdout(&status);
    let runs = std::fs::read_to_string(out.join("runs.csv")).unwrap();
    // Header plus iterations 0..=5 of the single run.
    assert_eq!(runs.lines().count(), 7);
    assert!(runs.lines().skip(1).all(|l| l.starts_with("random,3,")));
    assert!(out.join("summary.json").exists());
}

#[test]
fn bad_inputs_exit_nonzero() {
    let out = bin(&["calibrate", "--dataset", "/nonexistent/dataset.json"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("dataset.json");
    std::fs::write(&path, r#"{"version": 99}"#).unwrap();
    let out = bin(&["calibrate", "--dataset", path.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("version"));

    assert!(!bin(&["simulate", "--policy", "greedy"]).status.success());
}
