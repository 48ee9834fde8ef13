use std::path::PathBuf;
use std::process::ExitCode;

use active_handeye::cli::{calibrate_dataset, format_calibration, format_ranking, make_scene, rank_candidates};
use active_handeye::estimator::SolverConfig;
use active_handeye::evaluation::Policy;
use active_handeye::experiment::{run_experiment, write_report};
use active_handeye::io::{load_candidates, load_dataset, ExperimentConfig};
use anyhow::Context;
use clap::{Parser, Subcommand};

/// Active eye-in-hand calibration with next-best-view selection.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the simulated policy comparison and write CSV/JSON reports.
    Simulate {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Replaces the config's seed list; repeatable.
        #[arg(long)]
        seed: Vec<u64>,
        /// Replaces the config's policy list; repeatable.
        #[arg(long)]
        policy: Vec<Policy>,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
    },
    /// Calibrate from a dataset and print the estimate and its entropy.
    Calibrate {
        #[arg(long)]
        dataset: PathBuf,
    },
    /// Rank candidate poses by predicted information gain.
    NbvRank {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        candidates: PathBuf,
    },
    /// Write a default config plus candidates and an initial dataset.
    MakeScene {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "scene")]
        out_dir: PathBuf,
    },
}

fn load_config(path: Option<&PathBuf>) -> anyhow::Result<ExperimentConfig> {
    Ok(match path {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    })
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Simulate {
            config,
            seed,
            policy,
            out_dir,
        } => {
            let mut cfg = load_config(config.as_ref())?;
            if !seed.is_empty() {
                cfg.seeds = seed;
            }
            if !policy.is_empty() {
                cfg.policies = policy;
            }
            let report = run_experiment(&cfg)?;
            write_report(&report, &cfg, &out_dir)?;
            eprintln!("wrote {} rows to {}", report.rows.len(), out_dir.join(&cfg.outputs.runs_csv).display());
        }
        Command::Calibrate { dataset } => {
            let d = load_dataset(&dataset)?;
            let c = calibrate_dataset(&d, &SolverConfig::default())?;
            print!("{}", format_calibration(&c));
        }
        Command::NbvRank { dataset, candidates } => {
            let d = load_dataset(&dataset)?;
            let cands = load_candidates(&candidates)?;
            let c = calibrate_dataset(&d, &SolverConfig::default()).context("calibrating the dataset")?;
            let scores = rank_candidates(&c.solve.params, &c.info, &d, &cands)?;
            print!("{}", format_ranking(c.info.entropy, &scores));
        }
        Command::MakeScene { config, seed, out_dir } => {
            let cfg = load_config(config.as_ref())?;
            make_scene(&cfg, seed, &out_dir)?;
            eprintln!("wrote config.json, candidates.json and dataset.json to {}", out_dir.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
