//! Command-line front end for shot-budgeted Bayesian optimization experiments.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use shotline::engine::RunRecord;
use shotline::harness::{compare_arms, compute_regret, run_experiment, RunOptions};

#[derive(Parser)]
#[command(name = "shotline", version, about = "Shot-budgeted Bayesian optimization for variational circuits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every arm and replication of an experiment config.
    Run {
        config: PathBuf,
        /// Results directory (overrides `out_dir` in the config).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Master seed (overrides the config and SHOTLINE_SEED).
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads for replications.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Rank-sum comparison of two arms at a shot checkpoint.
    Compare {
        results: PathBuf,
        arm_a: String,
        arm_b: String,
        #[arg(long = "at-shots")]
        at_shots: u64,
    },
    /// Print the regret curve of one run log as CSV.
    Regret {
        run: PathBuf,
        /// Reference minimum J*.
        #[arg(long, allow_negative_numbers = true)]
        jstar: f64,
    },
}

fn env_seed() -> Result<Option<u64>> {
    match std::env::var("SHOTLINE_SEED") {
        Ok(s) => s
            .trim()
            .parse()
            .map(Some)
            .with_context(|| format!("SHOTLINE_SEED={s:?} is not an unsigned integer")),
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(e).context("reading SHOTLINE_SEED"),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run {
            config,
            out,
            seed,
            jobs,
        } => {
            let opts = RunOptions {
                out_dir: out,
                seed: match seed {
                    Some(s) => Some(s),
                    None => env_seed()?,
                },
                jobs,
            };
            let results = run_experiment(&config, &opts)
                .with_context(|| format!("running {}", config.display()))?;
            println!("results: {}", results.out_dir.display());
            println!("J* = {} ({:?})", results.j_star, results.ground_truth.mode);
            println!("arm,final_median_regret,final_q25,final_q75");
            for arm in &results.arms {
                let a = &arm.aggregate;
                match a.shots.len().checked_sub(1) {
                    Some(i) => println!("{},{},{},{}", arm.name(), a.median[i], a.q25[i], a.q75[i]),
                    None => println!("{},,,", arm.name()),
                }
            }
        }
        Command::Compare {
            results,
            arm_a,
            arm_b,
            at_shots,
        } => {
            let c = compare_arms(&results, &arm_a, &arm_b, at_shots)?;
            println!("shots,median_{arm_a},median_{arm_b},u,p_value");
            println!("{},{},{},{},{}", c.shots, c.median_a, c.median_b, c.u, c.p_value);
        }
        Command::Regret { run, jstar } => {
            let record = RunRecord::load(&run)?;
            let curve = compute_regret(&record, Some(jstar))?;
            println!("shots,regret");
            for (s, r) in curve.shots.iter().zip(&curve.regret) {
                match r {
                    Some(r) => println!("{s},{r}"),
                    None => println!("{s},"),
                }
            }
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
