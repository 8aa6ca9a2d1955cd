use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use compfw_cli::acceptance::{run_criterion, Suite};
use compfw_cli::config::ExperimentConfig;
use compfw_cli::experiment::run_experiment;
use compfw_cli::gap::{gap_at_point, read_point};
use compfw_cli::tasks::build_problem;

#[derive(Parser)]
#[command(name = "compfw", version, about = "Stochastic composite Frank-Wolfe experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every (algorithm, K, seed) cell of a config and write CSV results.
    Run {
        config: PathBuf,
        /// Worker threads; output does not depend on this.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Overrides the config's output_dir.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run an acceptance suite: unit, lemmas, rates or all.
    Accept {
        suite: Suite,
        /// Smaller grids and wider rate bands.
        #[arg(long)]
        fast: bool,
    },
    /// Print the objective and generalized gap at a point (one real per line).
    Gap { config: PathBuf, point: PathBuf },
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Run { config, jobs, output } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(dir) = output {
                cfg.output_dir = dir;
            }
            let summary = run_experiment(&cfg, jobs)?;
            println!("{} runs, {} failed; results in {}", summary.cells.len(), summary.failures(), summary.output_dir.display());
            for r in summary.rates.iter().filter(|r| r.estimator == "min_of_mean_gap") {
                match (r.slope, r.r_squared) {
                    (Some(s), Some(r2)) => println!("{}: slope {s:.4} (r2 {r2:.3})", r.algorithm),
                    _ => println!("{}: no rate fit ({})", r.algorithm, r.status),
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Accept { suite, fast } => {
            let mut all = true;
            for &id in suite.criteria() {
                let res = run_criterion(id, fast);
                println!("{res}");
                all &= res.passed;
            }
            Ok(if all { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
        Command::Gap { config, point } => {
            let cfg = ExperimentConfig::load(&config)?;
            let problem = build_problem(cfg.task, &cfg.task_params)?;
            let res = gap_at_point(&problem, &read_point(&point)?)?;
            println!("objective = {}", res.objective);
            println!("gap = {}", res.gap);
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
