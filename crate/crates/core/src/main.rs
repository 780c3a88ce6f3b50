use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use fvlab::harness::{run_experiment, Experiment, ExperimentConfig};

#[derive(Parser)]
#[command(name = "fvlab", version, about = "Finite volume convergence experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the available experiments.
    List,
    /// Run one experiment and write its report.
    Run {
        #[arg(long)]
        experiment: Option<String>,
        /// JSON configuration; flags override its fields.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        levels: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// CSV report path; the JSON summary goes next to it.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(
    experiment: Option<String>,
    config: Option<PathBuf>,
    levels: Option<usize>,
    seed: Option<u64>,
    out: Option<PathBuf>,
) -> fvlab::Result<bool> {
    let mut cfg = match &config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(id) = experiment {
        cfg.experiment = id;
    }
    if let Some(levels) = levels {
        cfg.levels = levels;
    }
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    if out.is_some() {
        cfg.output = out;
    }

    let start = Instant::now();
    let report = run_experiment(&cfg)?;
    let elapsed = start.elapsed();

    println!("experiment {} (config {})", report.experiment, report.config_hash);
    print!("{}", report.to_csv());
    for check in &report.checks {
        let mark = if check.passed { "PASS" } else { "FAIL" };
        println!("{mark} {}: {}", check.name, check.detail);
    }
    if let Some(path) = &cfg.output {
        println!("report written to {}", path.display());
    }
    println!("wall time {:.3} s", elapsed.as_secs_f64());
    Ok(report.passed)
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::List => {
            for e in Experiment::ALL {
                println!("{:<28} {}", e.id(), e.description());
            }
            ExitCode::SUCCESS
        }
        Command::Run { experiment, config, levels, seed, out } => {
            match run(experiment, config, levels, seed, out) {
                Ok(true) => ExitCode::SUCCESS,
                Ok(false) => ExitCode::from(1),
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
            }
        }
    }
}
