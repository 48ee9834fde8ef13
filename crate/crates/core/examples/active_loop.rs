//! One run of next-best-view calibration, printing what each iteration
//! picked and how the entropy and validation errors moved.
//!
//! `cargo run --release --example active_loop [seed] [nbv|random|max_distance]`

use active_handeye::evaluation::Policy;
use active_handeye::experiment::SeedSetup;
use active_handeye::io::ExperimentConfig;

fn main() -> active_handeye::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let seed: u64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let policy: Policy = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(Policy::Nbv);
    let cfg = ExperimentConfig::default();
    let setup = SeedSetup::new(&cfg, seed)?;
    println!("seed {seed}, policy {}, initial views {:?}", policy.name(), setup.initial);

    let report = setup.run(&cfg, policy)?;
    println!("iter  view  pred_ig  entropy   e_rt_mm  e_rR_deg  rmse_px");
    for r in &report.records {
        let view = r.chosen.map_or("-".to_string(), |c| c.to_string());
        let ig = r.predicted_gain.map_or("-".to_string(), |g| format!("{g:.3}"));
        println!(
            "{:>4}  {view:>4}  {ig:>7}  {:>7.2}  {:>8.3}  {:>8.4}  {:>7.3}",
            r.iteration, r.entropy, r.metrics.e_rt_mm, r.metrics.e_rr_deg, r.metrics.e_rmse_px
        );
    }
    println!("stopped: {:?}", report.stop);
    Ok(())
}
