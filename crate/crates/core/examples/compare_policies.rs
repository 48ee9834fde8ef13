//! Runs the default policy comparison and prints the per-iteration means.
//!
//! `cargo run --release --example compare_policies [seeds]`

use active_handeye::evaluation::Policy;
use active_handeye::experiment::run_experiment;
use active_handeye::io::ExperimentConfig;

fn main() -> active_handeye::Result<()> {
    let seeds: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(20);
    let cfg = ExperimentConfig {
        seeds: (0..seeds).collect(),
        ..ExperimentConfig::default()
    };
    let report = run_experiment(&cfg)?;
    println!("policy        iter  entropy   e_at_mm  e_aR_deg  e_rt_mm  e_rR_deg  e_rmse_px");
    for policy in [Policy::Nbv, Policy::Random, Policy::MaxDistance] {
        for s in report.summary.iter().filter(|s| s.policy == policy) {
            println!(
                "{:<13} {:>4}  {:>7.3}  {:>8.3}  {:>8.4}  {:>7.3}  {:>8.4}  {:>9.4}",
                policy.name(),
                s.iteration,
                s.entropy_nats.mean,
                s.e_at_mm.mean,
                s.e_ar_deg.mean,
                s.e_rt_mm.mean,
                s.e_rr_deg.mean,
                s.e_rmse_px.mean
            );
        }
    }
    if let Some(r) = report.nbv_scatter_pearson {
        println!("pearson(predicted gain, validation RMSE reduction) over NBV steps: {r:.3}");
    }
    Ok(())
}
