//! Predicted information gain of every candidate against the validation RMSE
//! reduction it actually brings, from the initial three-view state.
//!
//! `cargo run --release --example ig_vs_error [seed] [--pairs]`

use active_handeye::evaluation::pearson_correlation;
use active_handeye::experiment::SeedSetup;
use active_handeye::io::ExperimentConfig;

fn main() -> active_handeye::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let seed: u64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let setup = SeedSetup::new(&ExperimentConfig::default(), seed)?;
    let outcomes = setup.initial_outcomes()?;
    if args.iter().any(|a| a == "--pairs") {
        println!("candidate,predicted_ig_nats,rmse_reduction_px");
        for o in &outcomes {
            println!("{},{},{}", o.index, o.predicted_gain, o.rmse_reduction());
        }
    }
    let x: Vec<f64> = outcomes.iter().map(|o| o.predicted_gain).collect();
    let y: Vec<f64> = outcomes.iter().map(|o| o.rmse_reduction()).collect();
    println!(
        "seed {seed}: Pearson r = {:.3} over {} candidates",
        pearson_correlation(&x, &y)?,
        outcomes.len()
    );
    Ok(())
}
