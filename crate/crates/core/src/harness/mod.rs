//! Replicated experiments: runs every arm of a config under shared seeds,
//! computes regret against the reference minimum and writes JSONL, CSV,
//! SVG and a manifest.
//!
//! Output layout under the results directory:
//!
//! ```text
//! manifest.json                 config hash, seeds, J*
//! runs/<arm>/rep_000.jsonl      one run log per replication
//! <arm>.csv                     shots,median_regret,q25,q75
//! <arm>_replications.csv        shots,rep_000,rep_001,...
//! regret.svg                    all arms
//! timings.json                  wall-clock seconds (not reproducible)
//! ```
//!
//! Relative paths inside a config (the objective file and `out_dir`) are
//! resolved against the directory containing the config.

mod config;
mod plot;
mod regret;
mod stats;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

pub use config::{config_hash, ArmConfig, ArmKernel, ExperimentConfig, ObjectiveRef};
pub use plot::regret_svg;
pub use regret::{checkpoints, compute_regret, AggregateCurve, RegretCurve, ReplicationTable};
pub use stats::{mann_whitney, median, quantile, RankSum};

use crate::engine::{self, RunConfig, RunRecord};
use crate::error::{Error, Result};
use crate::objective::{GroundTruth, ObjectiveSpec};
use crate::rng::derive_seed;

/// Seed of the multistart search used when a circuit is too large for the
/// reference grid. Fixed so that `J*` depends on the objective alone.
const GROUND_TRUTH_SEED: u64 = 0;
const GROUND_TRUTH_STARTS: usize = 64;
/// Fewest replications [`compare_arms`] accepts.
pub const MIN_COMPARE_REPLICATIONS: usize = 5;

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Overrides the config's `out_dir`.
    pub out_dir: Option<PathBuf>,
    /// Overrides the config's master seed.
    pub seed: Option<u64>,
    /// Worker threads (defaults to the available parallelism).
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct ArmResult {
    pub config: ArmConfig,
    pub run_config: RunConfig,
    pub records: Vec<RunRecord>,
    pub curves: Vec<RegretCurve>,
    pub table: ReplicationTable,
    pub aggregate: AggregateCurve,
}

impl ArmResult {
    pub fn name(&self) -> &str {
        &self.config.name
    }

    /// Regret after each replication's last query.
    pub fn final_regrets(&self) -> Vec<f64> {
        self.curves.iter().filter_map(RegretCurve::last).collect()
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentResults {
    pub out_dir: PathBuf,
    pub config_hash: String,
    pub master_seed: u64,
    pub seeds: Vec<u64>,
    pub ground_truth: GroundTruth,
    pub j_star: f64,
    pub arms: Vec<ArmResult>,
}

impl ExperimentResults {
    pub fn arm(&self, name: &str) -> Option<&ArmResult> {
        self.arms.iter().find(|a| a.name() == name)
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    config_file: String,
    config_hash: &'a str,
    master_seed: u64,
    replications: usize,
    seeds: &'a [u64],
    shots_high: u64,
    budget: u64,
    j_star: f64,
    ground_truth: &'a GroundTruth,
    arms: Vec<ManifestArm<'a>>,
}

#[derive(Serialize)]
struct ManifestArm<'a> {
    name: &'a str,
    run_config: &'a RunConfig,
    runs: String,
    aggregate_csv: String,
    replications_csv: String,
}

#[derive(Serialize)]
struct ArmTiming<'a> {
    name: &'a str,
    total_seconds: f64,
    mean_iteration_seconds: f64,
}

/// Loads `config_path` and runs the experiment, writing all outputs.
pub fn run_experiment(config_path: &Path, opts: &RunOptions) -> Result<ExperimentResults> {
    let bytes = std::fs::read(config_path).map_err(|e| Error::io(config_path, e))?;
    let cfg = ExperimentConfig::from_slice(&bytes, config_path)?;
    let base = config_path.parent().unwrap_or(Path::new("."));
    let objective = cfg.objective.resolve(base)?;
    let out_dir = opts.out_dir.clone().unwrap_or_else(|| base.join(&cfg.out_dir));
    let results = execute(&cfg, &objective, config_hash(&bytes), out_dir, opts)?;
    write_outputs(&cfg, &results, config_path)?;
    Ok(results)
}

/// Runs every (arm, replication) pair; nothing is written to disk.
///
/// Replication `i` of every arm uses the seed `derive_seed(master, i)`, so
/// arms that differ only in their name produce identical records.
pub fn execute(
    cfg: &ExperimentConfig,
    objective: &ObjectiveSpec,
    config_hash: String,
    out_dir: PathBuf,
    opts: &RunOptions,
) -> Result<ExperimentResults> {
    cfg.validate()?;
    let master_seed = opts.seed.unwrap_or(cfg.seed);
    let seeds: Vec<u64> = (0..cfg.replications as u64)
        .map(|i| derive_seed(master_seed, i))
        .collect();
    let ground_truth = objective.reachable_minimum(GROUND_TRUTH_STARTS, GROUND_TRUTH_SEED)?;
    let j_star = ground_truth
        .value
        .ok_or_else(|| Error::InvalidObjective("no reference minimum available".into()))?;
    let run_configs = cfg
        .arms
        .iter()
        .map(|a| cfg.run_config(a))
        .collect::<Result<Vec<_>>>()?;

    let tasks: Vec<(usize, usize)> = (0..cfg.arms.len())
        .flat_map(|a| (0..cfg.replications).map(move |r| (a, r)))
        .collect();
    let jobs = opts
        .jobs
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
        .max(1);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    let mut records: Vec<RunRecord> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(a, r)| engine::run(objective, &run_configs[a], seeds[r]))
            .collect::<Result<Vec<_>>>()
    })?;

    let axis = checkpoints(cfg.shots_high, cfg.budget);
    let mut arms = Vec::with_capacity(cfg.arms.len());
    for (arm, run_config) in cfg.arms.iter().zip(run_configs).rev() {
        let arm_records = records.split_off(records.len() - cfg.replications);
        let curves = arm_records
            .iter()
            .map(|r| compute_regret(r, Some(j_star)))
            .collect::<Result<Vec<_>>>()?;
        let table = ReplicationTable::new(&curves, &axis);
        let aggregate = table.aggregate();
        arms.push(ArmResult {
            config: arm.clone(),
            run_config,
            records: arm_records,
            curves,
            table,
            aggregate,
        });
    }
    arms.reverse();

    Ok(ExperimentResults {
        out_dir,
        config_hash,
        master_seed,
        seeds,
        ground_truth,
        j_star,
        arms,
    })
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn aggregate_csv(c: &AggregateCurve) -> String {
    let mut s = String::from("shots,median_regret,q25,q75\n");
    for i in 0..c.shots.len() {
        let _ = writeln!(s, "{},{},{},{}", c.shots[i], c.median[i], c.q25[i], c.q75[i]);
    }
    s
}

fn replications_csv(t: &ReplicationTable) -> String {
    let reps = t.values.first().map_or(0, Vec::len);
    let mut s = String::from("shots");
    for r in 0..reps {
        let _ = write!(s, ",rep_{r:03}");
    }
    s.push('\n');
    for (shots, row) in t.shots.iter().zip(&t.values) {
        let _ = write!(s, "{shots}");
        for v in row {
            match v {
                Some(v) => {
                    let _ = write!(s, ",{v}");
                }
                None => s.push(','),
            }
        }
        s.push('\n');
    }
    s
}

/// Writes run logs, CSVs, the plot, the manifest and timings.
pub fn write_outputs(cfg: &ExperimentConfig, results: &ExperimentResults, config_path: &Path) -> Result<()> {
    let out = &results.out_dir;
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let mut manifest_arms = Vec::new();
    let mut timings = Vec::new();
    for arm in &results.arms {
        let name = arm.name();
        let runs_dir = out.join("runs").join(name);
        if runs_dir.exists() {
            std::fs::remove_dir_all(&runs_dir).map_err(|e| Error::io(&runs_dir, e))?;
        }
        std::fs::create_dir_all(&runs_dir).map_err(|e| Error::io(&runs_dir, e))?;
        for (i, rec) in arm.records.iter().enumerate() {
            rec.save(&runs_dir.join(format!("rep_{i:03}.jsonl")))?;
        }
        write_file(&out.join(format!("{name}.csv")), &aggregate_csv(&arm.aggregate))?;
        write_file(&out.join(format!("{name}_replications.csv")), &replications_csv(&arm.table))?;
        manifest_arms.push(ManifestArm {
            name,
            run_config: &arm.run_config,
            runs: format!("runs/{name}"),
            aggregate_csv: format!("{name}.csv"),
            replications_csv: format!("{name}_replications.csv"),
        });
        let times: Vec<f64> = arm.records.iter().flat_map(|r| r.wall_time.iter().copied()).collect();
        let total: f64 = times.iter().sum();
        timings.push(ArmTiming {
            name,
            total_seconds: total,
            mean_iteration_seconds: if times.is_empty() { 0.0 } else { total / times.len() as f64 },
        });
    }
    let curves: Vec<(String, AggregateCurve)> = results
        .arms
        .iter()
        .map(|a| (a.name().to_string(), a.aggregate.clone()))
        .collect();
    write_file(&out.join("regret.svg"), &regret_svg(&curves, cfg.budget))?;

    let manifest = Manifest {
        config_file: config_path
            .file_name()
            .map_or_else(String::new, |f| f.to_string_lossy().into_owned()),
        config_hash: &results.config_hash,
        master_seed: results.master_seed,
        replications: cfg.replications,
        seeds: &results.seeds,
        shots_high: cfg.shots_high,
        budget: cfg.budget,
        j_star: results.j_star,
        ground_truth: &results.ground_truth,
        arms: manifest_arms,
    };
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    write_file(&out.join("manifest.json"), &text)?;
    let mut text = serde_json::to_string_pretty(&timings)?;
    text.push('\n');
    write_file(&out.join("timings.json"), &text)
}

/// Medians and rank-sum test of two arms at one checkpoint.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    /// Checkpoint actually used (the last one at or before the request).
    pub shots: u64,
    pub median_a: f64,
    pub median_b: f64,
    pub u: f64,
    pub p_value: f64,
}

/// Compares two samples of regret values.
pub fn compare_samples(shots: u64, a: &[f64], b: &[f64]) -> Result<Comparison> {
    for (label, s) in [("A", a), ("B", b)] {
        if s.len() < MIN_COMPARE_REPLICATIONS {
            return Err(Error::Comparison(format!(
                "arm {label} has {} replications at the checkpoint; at least {MIN_COMPARE_REPLICATIONS} needed",
                s.len()
            )));
        }
    }
    let test = mann_whitney(a, b).expect("nonempty samples");
    Ok(Comparison {
        shots,
        median_a: median(a).expect("nonempty"),
        median_b: median(b).expect("nonempty"),
        u: test.u,
        p_value: test.p_value,
    })
}

/// Parses a `<arm>_replications.csv` file back into a table.
pub fn read_replications_csv(path: &Path) -> Result<ReplicationTable> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let malformed = |line: usize, message: String| Error::Malformed {
        path: path.to_path_buf(),
        message: format!("line {line}: {message}"),
    };
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| malformed(1, "empty file".into()))?;
    let reps = header.split(',').count().saturating_sub(1);
    let mut table = ReplicationTable {
        shots: Vec::new(),
        values: Vec::new(),
    };
    for (i, line) in lines {
        let mut cells = line.split(',');
        let shots = cells
            .next()
            .unwrap_or_default()
            .parse()
            .map_err(|e| malformed(i + 1, format!("shots: {e}")))?;
        let row = cells
            .map(|c| {
                if c.is_empty() {
                    Ok(None)
                } else {
                    c.parse().map(Some).map_err(|e| malformed(i + 1, format!("{c:?}: {e}")))
                }
            })
            .collect::<Result<Vec<Option<f64>>>>()?;
        if row.len() != reps {
            return Err(malformed(i + 1, format!("expected {reps} replications, found {}", row.len())));
        }
        table.shots.push(shots);
        table.values.push(row);
    }
    Ok(table)
}

fn checkpoint_values(table: &ReplicationTable, at_shots: u64, arm: &str) -> Result<(u64, Vec<f64>)> {
    let idx = table.shots.partition_point(|&s| s <= at_shots);
    let i = idx.checked_sub(1).ok_or_else(|| {
        Error::Comparison(format!("arm {arm:?} has no checkpoint at or before {at_shots} shots"))
    })?;
    let values: Option<Vec<f64>> = table.values[i].iter().copied().collect();
    let values = values.ok_or_else(|| {
        Error::Comparison(format!(
            "arm {arm:?} has replications without an incumbent at {} shots",
            table.shots[i]
        ))
    })?;
    Ok((table.shots[i], values))
}

/// Reads two arms' per-replication CSVs from `results_dir` and compares them
/// at `at_shots` (which must not exceed the experiment budget).
pub fn compare_arms(results_dir: &Path, arm_a: &str, arm_b: &str, at_shots: u64) -> Result<Comparison> {
    let manifest_path = results_dir.join("manifest.json");
    let manifest: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?,
    )?;
    let budget = manifest
        .get("budget")
        .and_then(serde_json::Value::as_u64)
        .ok_or_else(|| Error::Malformed {
            path: manifest_path.clone(),
            message: "missing budget".into(),
        })?;
    if at_shots > budget {
        return Err(Error::Comparison(format!(
            "checkpoint {at_shots} is beyond the budget {budget}"
        )));
    }
    let table_a = read_replications_csv(&results_dir.join(format!("{arm_a}_replications.csv")))?;
    let table_b = read_replications_csv(&results_dir.join(format!("{arm_b}_replications.csv")))?;
    let (shots, a) = checkpoint_values(&table_a, at_shots, arm_a)?;
    let (_, b) = checkpoint_values(&table_b, at_shots, arm_b)?;
    compare_samples(shots, &a, &b)
}
