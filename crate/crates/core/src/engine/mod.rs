//! Bayesian optimization loops under a fixed shot budget.
//!
//! Each run draws from three independent streams derived from its seed:
//! initial design, shot noise, and optimizer internals (restarts and
//! acquisition candidates). Runs with the same seed therefore share their
//! initial points and noise draws regardless of method.

mod ledger;
mod record;

use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use ledger::{BudgetLedger, Method};
pub use record::{incumbent, Phase, QueryRecord, RunRecord};

use crate::acquisition::{Acquisition, AcquisitionOptimizer, FrozenMean, DEFAULT_LCB_BETA};
use crate::error::{Error, Result};
use crate::gp::{fit_hyperparameters, FitConfig, Hyperparameters, KernelFamily, KernelSpec, MeanMode};
use crate::objective::ObjectiveSpec;
use crate::param::ParamVector;
use crate::rng;

const INIT_STREAM: u64 = 0;
const NOISE_STREAM: u64 = 1;
const OPTIMIZER_STREAM: u64 = 2;

/// Everything that determines a run besides the objective and the seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub method: Method,
    pub kernel: KernelFamily,
    pub gamma: f64,
    pub budget: u64,
    pub shots_high: u64,
    /// Low-shot count `s_low` (residual runs only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shots_low: Option<u64>,
    pub beta: f64,
    /// Pin the BO model noise to `σ₁² / s̄` (and the low-shot model's to
    /// `σ₁² / s_low`) instead of fitting it.
    #[serde(default)]
    pub pin_noise: bool,
    #[serde(default)]
    pub fit: FitConfig,
    #[serde(default = "default_low_shot_fit")]
    pub low_shot_fit: FitConfig,
    #[serde(default)]
    pub acquisition: AcquisitionOptimizer,
}

/// Low-shot designs can hold thousands of points; hyperparameters are fitted
/// on the first 200 and the mean is then conditioned on all of them.
pub fn default_low_shot_fit() -> FitConfig {
    FitConfig {
        max_points: Some(100),
        ..FitConfig::default()
    }
}

impl RunConfig {
    pub fn vanilla(kernel: KernelFamily, gamma: f64, budget: u64, shots_high: u64) -> Self {
        RunConfig {
            method: Method::Vanilla,
            kernel,
            gamma,
            budget,
            shots_high,
            shots_low: None,
            beta: DEFAULT_LCB_BETA,
            pin_noise: false,
            fit: FitConfig::default(),
            low_shot_fit: default_low_shot_fit(),
            acquisition: AcquisitionOptimizer::default(),
        }
    }

    pub fn lsr(kernel: KernelFamily, gamma: f64, budget: u64, shots_high: u64, shots_low: u64) -> Self {
        RunConfig {
            method: Method::Lsr,
            shots_low: Some(shots_low),
            beta: crate::acquisition::DEFAULT_LSR_BETA,
            ..Self::vanilla(kernel, gamma, budget, shots_high)
        }
    }

    pub fn ledger(&self) -> Result<BudgetLedger> {
        match self.method {
            Method::Vanilla => BudgetLedger::vanilla(self.budget, self.shots_high, self.gamma),
            Method::Lsr => {
                let low = self.shots_low.ok_or_else(|| {
                    Error::InvalidBudget("low-shot-residual run without shots_low".into())
                })?;
                BudgetLedger::lsr(self.budget, self.shots_high, low, self.gamma)
            }
        }
    }
}

fn fit_config_for(base: &FitConfig, pin_noise: bool, noise: f64) -> FitConfig {
    let mut cfg = base.clone();
    if pin_noise {
        cfg.fixed_noise = Some(noise);
    }
    cfg
}

/// Fitted hyperparameters, or `fallback` (with the prior mean reset) when
/// there are fewer than two observations.
fn fit_or_fallback(
    inputs: &[ParamVector],
    targets: &[f64],
    family: KernelFamily,
    config: &FitConfig,
    warm: Option<&Hyperparameters>,
    fallback: &Hyperparameters,
    rng: &mut impl rand::Rng,
) -> Result<Hyperparameters> {
    if inputs.len() >= 2 {
        return Ok(fit_hyperparameters(inputs, targets, family, config, warm, rng)?.hyper);
    }
    let mut h = warm.cloned().unwrap_or_else(|| fallback.clone());
    h.prior_mean = match config.mean {
        MeanMode::Constant if !targets.is_empty() => targets.iter().sum::<f64>() / targets.len() as f64,
        _ => 0.0,
    };
    Ok(h)
}

fn check_objective(obj: &ObjectiveSpec, cfg: &RunConfig) -> Result<()> {
    if !(cfg.beta >= 0.0 && cfg.beta.is_finite()) {
        return Err(Error::InvalidHyperparameter {
            name: "beta",
            value: cfg.beta,
        });
    }
    if obj.dim() == 0 {
        return Err(Error::InvalidObjective("zero-dimensional objective".into()));
    }
    Ok(())
}

/// Vanilla BO: `⌊γB/s̄⌋` uniform high-shot queries, then LCB-guided
/// high-shot queries while the budget affords another one.
pub fn run_vanilla_bo(obj: &ObjectiveSpec, cfg: &RunConfig, seed: u64) -> Result<RunRecord> {
    if cfg.method != Method::Vanilla {
        return Err(Error::InvalidConfig("run_vanilla_bo needs method = vanilla".into()));
    }
    check_objective(obj, cfg)?;
    let mut ledger = cfg.ledger()?;
    let dim = obj.dim();
    let s_high = cfg.shots_high;
    let mut init_rng = rng::stream(seed, INIT_STREAM);
    let mut noise_rng = rng::stream(seed, NOISE_STREAM);
    let mut opt_rng = rng::stream(seed, OPTIMIZER_STREAM);
    let mut record = RunRecord::new(cfg.clone(), seed);

    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for k in 0..ledger.init_count() {
        let theta = ParamVector::uniform(dim, &mut init_rng);
        ledger.spend(s_high)?;
        let sample = obj.evaluate(&theta, s_high, &mut noise_rng)?;
        record.push(QueryRecord {
            phase: Phase::Init,
            k,
            theta,
            shots: s_high,
            y: sample.value,
            incumbent_y: None,
            budget_spent: ledger.spent(),
            model: None,
            residual: None,
        });
        xs.push(sample.theta);
        ys.push(sample.value);
    }

    let high_noise = obj.noise_variance(s_high);
    let fit_cfg = fit_config_for(&cfg.fit, cfg.pin_noise, high_noise);
    let fallback = Hyperparameters {
        kernel: KernelSpec::new(cfg.kernel, vec![1.0; dim], 1.0)?,
        noise_variance: high_noise.max(cfg.fit.noise_bounds.0),
        prior_mean: 0.0,
    };
    let mut warm: Option<Hyperparameters> = None;
    let mut k = 0;
    while ledger.can_afford(s_high) {
        let started = Instant::now();
        let hyper = fit_or_fallback(&xs, &ys, cfg.kernel, &fit_cfg, warm.as_ref(), &fallback, &mut opt_rng)?;
        let model = hyper.condition(&xs, &ys)?;
        let acq = Acquisition::lcb(&model, cfg.beta)?;
        let theta = cfg.acquisition.optimize(&acq, &mut opt_rng);
        ledger.spend(s_high)?;
        let sample = obj.evaluate(&theta, s_high, &mut noise_rng)?;
        record.push(QueryRecord {
            phase: Phase::Bo,
            k,
            theta,
            shots: s_high,
            y: sample.value,
            incumbent_y: None,
            budget_spent: ledger.spent(),
            model: Some(hyper.clone()),
            residual: None,
        });
        xs.push(sample.theta);
        ys.push(sample.value);
        warm = Some(hyper);
        record.wall_time.push(started.elapsed().as_secs_f64());
        k += 1;
    }
    Ok(record)
}

/// Low-shot-residual BO.
///
/// Spends `γB` on `m = ⌊γB/s_low⌋` uniform low-shot queries, freezes the
/// posterior mean `μ_g` of a GP fitted to them, then repeatedly fits a GP
/// to the residuals `y_i - μ_g(θ_i)` of the high-shot observations and
/// queries the minimizer of `μ_g + μ_ε - √β σ_ε` at `s̄` shots while the
/// budget affords it.
pub fn run_lsr_bo(obj: &ObjectiveSpec, cfg: &RunConfig, seed: u64) -> Result<RunRecord> {
    if cfg.method != Method::Lsr {
        return Err(Error::InvalidConfig("run_lsr_bo needs method = lsr".into()));
    }
    check_objective(obj, cfg)?;
    let mut ledger = cfg.ledger()?;
    let dim = obj.dim();
    let s_high = cfg.shots_high;
    let s_low = ledger.shots_low();
    let mut init_rng = rng::stream(seed, INIT_STREAM);
    let mut noise_rng = rng::stream(seed, NOISE_STREAM);
    let mut opt_rng = rng::stream(seed, OPTIMIZER_STREAM);
    let mut record = RunRecord::new(cfg.clone(), seed);

    let mut low_xs = Vec::new();
    let mut low_ys = Vec::new();
    for k in 0..ledger.init_count() {
        let theta = ParamVector::uniform(dim, &mut init_rng);
        ledger.spend(s_low)?;
        let sample = obj.evaluate(&theta, s_low, &mut noise_rng)?;
        record.push(QueryRecord {
            phase: Phase::Init,
            k,
            theta,
            shots: s_low,
            y: sample.value,
            incumbent_y: None,
            budget_spent: ledger.spent(),
            model: None,
            residual: None,
        });
        low_xs.push(sample.theta);
        low_ys.push(sample.value);
    }

    let low_noise = obj.noise_variance(s_low);
    let low_fit_cfg = fit_config_for(&cfg.low_shot_fit, cfg.pin_noise, low_noise);
    let low_fallback = Hyperparameters {
        kernel: KernelSpec::new(cfg.kernel, vec![1.0; dim], 1.0)?,
        noise_variance: low_noise.max(cfg.low_shot_fit.noise_bounds.0),
        prior_mean: 0.0,
    };
    let low_hyper = fit_or_fallback(
        &low_xs,
        &low_ys,
        cfg.kernel,
        &low_fit_cfg,
        None,
        &low_fallback,
        &mut opt_rng,
    )?;
    let low_shot = FrozenMean::new(low_hyper.condition(&low_xs, &low_ys)?);
    record.low_shot_model = Some(low_hyper.clone());

    let high_noise = obj.noise_variance(s_high);
    let fit_cfg = fit_config_for(&cfg.fit, cfg.pin_noise, high_noise);
    // Before the residual GP can be fitted its scale is taken from the
    // low-shot noise level: the residual cannot exceed what μ_g failed to average out.
    let residual_fallback = Hyperparameters {
        kernel: KernelSpec::new(
            cfg.kernel,
            low_hyper.kernel.lengthscales.clone(),
            low_hyper
                .noise_variance
                .clamp(cfg.fit.output_scale_bounds.0, cfg.fit.output_scale_bounds.1),
        )?,
        noise_variance: high_noise.max(cfg.fit.noise_bounds.0),
        prior_mean: 0.0,
    };

    let mut xs = Vec::new();
    let mut residuals = Vec::new();
    let mut warm: Option<Hyperparameters> = None;
    let mut k = 0;
    while ledger.can_afford(s_high) {
        let started = Instant::now();
        let hyper = fit_or_fallback(
            &xs,
            &residuals,
            cfg.kernel,
            &fit_cfg,
            warm.as_ref(),
            &residual_fallback,
            &mut opt_rng,
        )?;
        let model = hyper.condition(&xs, &residuals)?;
        let acq = Acquisition::lsr_lcb(&low_shot, &model, cfg.beta)?;
        let theta = cfg.acquisition.optimize(&acq, &mut opt_rng);
        ledger.spend(s_high)?;
        let sample = obj.evaluate(&theta, s_high, &mut noise_rng)?;
        let residual = sample.value - low_shot.value(sample.theta.as_slice());
        record.push(QueryRecord {
            phase: Phase::Bo,
            k,
            theta,
            shots: s_high,
            y: sample.value,
            incumbent_y: None,
            budget_spent: ledger.spent(),
            model: Some(hyper.clone()),
            residual: Some(residual),
        });
        xs.push(sample.theta);
        residuals.push(residual);
        warm = Some(hyper);
        record.wall_time.push(started.elapsed().as_secs_f64());
        k += 1;
    }
    Ok(record)
}

/// Dispatches on `cfg.method`.
pub fn run(obj: &ObjectiveSpec, cfg: &RunConfig, seed: u64) -> Result<RunRecord> {
    match cfg.method {
        Method::Vanilla => run_vanilla_bo(obj, cfg, seed),
        Method::Lsr => run_lsr_bo(obj, cfg, seed),
    }
}

/// Rebuilds the frozen low-shot mean of a residual run from its log.
pub fn low_shot_mean(record: &RunRecord) -> Result<Option<FrozenMean>> {
    let Some(h) = &record.low_shot_model else {
        return Ok(None);
    };
    let (xs, ys): (Vec<_>, Vec<_>) = record
        .queries
        .iter()
        .filter(|q| q.phase == Phase::Init)
        .map(|q| (q.theta.clone(), q.y))
        .unzip();
    Ok(Some(FrozenMean::new(h.condition(&xs, &ys)?)))
}
