//! Marginal-likelihood hyperparameter fitting.
//!
//! Free hyperparameters are searched in log space on a bounded box with a
//! multistart Nelder–Mead; the first start is the warm start (previous fit)
//! when one is given.

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::kernel::{KernelFamily, KernelSpec};
use super::model::{factorize, forward_substitute, GpModel};
use super::simplex::minimize_bounded;
use crate::error::{Error, Result};
use crate::param::ParamVector;

/// How the constant prior mean is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum MeanMode {
    /// Mean of the training targets.
    #[default]
    Constant,
    Zero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    pub restarts: usize,
    /// Restarts when a warm start is supplied (the warm start counts as one).
    pub warm_restarts: usize,
    /// Likelihood evaluations per restart.
    pub max_evals: usize,
    pub lengthscale_bounds: (f64, f64),
    pub output_scale_bounds: (f64, f64),
    pub noise_bounds: (f64, f64),
    /// Only used when the periodic family has `fixed_period = false`.
    pub period_bounds: (f64, f64),
    pub mean: MeanMode,
    /// Pins the observation noise instead of fitting it.
    pub fixed_noise: Option<f64>,
    /// Fit on at most this many observations (the first ones). The final
    /// model is still conditioned on every observation.
    pub max_points: Option<usize>,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            restarts: 8,
            warm_restarts: 3,
            max_evals: 120,
            lengthscale_bounds: (1e-2, 1e2),
            output_scale_bounds: (1e-4, 1e4),
            noise_bounds: (1e-8, 1e1),
            period_bounds: (1e-1, 1e2),
            mean: MeanMode::Constant,
            fixed_noise: None,
            max_points: None,
        }
    }
}

/// Everything needed to condition a GP on data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperparameters {
    pub kernel: KernelSpec,
    pub noise_variance: f64,
    pub prior_mean: f64,
}

impl Hyperparameters {
    pub fn condition(&self, inputs: &[ParamVector], targets: &[f64]) -> Result<GpModel> {
        GpModel::new(
            self.kernel.clone(),
            self.prior_mean,
            self.noise_variance,
            inputs,
            targets,
        )
    }
}

#[derive(Debug, Clone)]
pub struct FitOutcome {
    pub hyper: Hyperparameters,
    pub log_likelihood: f64,
}

struct Layout {
    dim: usize,
    fit_noise: bool,
    fit_period: bool,
}

impl Layout {
    fn len(&self) -> usize {
        self.dim + 1 + self.fit_noise as usize + self.fit_period as usize
    }
}

fn to_unit(value: f64, (lo, hi): (f64, f64)) -> f64 {
    ((value.clamp(lo, hi).ln() - lo.ln()) / (hi.ln() - lo.ln())).clamp(0.0, 1.0)
}

fn from_unit(u: f64, (lo, hi): (f64, f64)) -> f64 {
    (lo.ln() + u * (hi.ln() - lo.ln())).exp().clamp(lo, hi)
}

struct Problem<'a> {
    family: KernelFamily,
    config: &'a FitConfig,
    layout: Layout,
    n: usize,
    /// Per-dimension pairwise components (lower triangle, row-major pairs)
    /// when the period is not being fitted; raw differences otherwise.
    pair_terms: Vec<Vec<f64>>,
    centered: Vec<f64>,
}

impl Problem<'_> {
    fn decode(&self, u: &[f64]) -> (KernelSpec, f64) {
        let c = self.config;
        let d = self.layout.dim;
        let lengthscales = u[..d]
            .iter()
            .map(|&v| from_unit(v, c.lengthscale_bounds))
            .collect();
        let output_scale = from_unit(u[d], c.output_scale_bounds);
        let mut idx = d + 1;
        let noise = if self.layout.fit_noise {
            idx += 1;
            from_unit(u[idx - 1], c.noise_bounds)
        } else {
            c.fixed_noise.unwrap_or(c.noise_bounds.0)
        };
        let family = match self.family {
            KernelFamily::Periodic { period, fixed_period } if self.layout.fit_period => {
                let _ = period;
                KernelFamily::Periodic {
                    period: from_unit(u[idx], c.period_bounds),
                    fixed_period,
                }
            }
            f => f,
        };
        (
            KernelSpec {
                family,
                lengthscales,
                output_scale,
            },
            noise,
        )
    }

    fn encode(&self, hyper: &Hyperparameters) -> Vec<f64> {
        let c = self.config;
        let mut u: Vec<f64> = hyper
            .kernel
            .lengthscales
            .iter()
            .map(|&l| to_unit(l, c.lengthscale_bounds))
            .collect();
        u.push(to_unit(hyper.kernel.output_scale, c.output_scale_bounds));
        if self.layout.fit_noise {
            u.push(to_unit(hyper.noise_variance, c.noise_bounds));
        }
        if self.layout.fit_period {
            if let KernelFamily::Periodic { period, .. } = hyper.kernel.family {
                u.push(to_unit(period, c.period_bounds));
            }
        }
        u
    }

    /// Log marginal likelihood, or `-inf` when the matrix cannot be factorized.
    fn log_likelihood(&self, kernel: &KernelSpec, noise: f64) -> f64 {
        let n = self.n;
        let weights = kernel.component_weights();
        let mut k = DMatrix::zeros(n, n);
        let mut pair = 0;
        for i in 0..n {
            for j in 0..i {
                let mut reduced = 0.0;
                for (dim, w) in weights.iter().enumerate() {
                    let t = self.pair_terms[dim][pair];
                    let c = if self.layout.fit_period {
                        kernel.family.component(t, 0.0)
                    } else {
                        t
                    };
                    reduced += w * c;
                }
                let v = kernel.from_reduced(reduced);
                k[(i, j)] = v;
                k[(j, i)] = v;
                pair += 1;
            }
            k[(i, i)] = kernel.output_scale + noise;
        }
        let Ok((l, _)) = factorize(k, kernel.output_scale) else {
            return f64::NEG_INFINITY;
        };
        let mut alpha = self.centered.clone();
        forward_substitute(&l, &mut alpha);
        // after the forward solve, |L⁻¹ r|² = rᵀ K⁻¹ r
        let fit: f64 = alpha.iter().map(|v| v * v).sum();
        let log_det: f64 = l.diagonal().iter().map(|d| d.ln()).sum();
        -0.5 * fit - log_det - 0.5 * n as f64 * (2.0 * std::f64::consts::PI).ln()
    }
}

fn variance(v: &[f64]) -> f64 {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / v.len() as f64
}

/// Fits kernel hyperparameters, noise variance and prior mean by maximizing
/// the log marginal likelihood.
///
/// Requires at least two observations. Constant targets give a degenerate
/// fit with the output scale (and noise, when free) at their lower bounds.
pub fn fit_hyperparameters<R: Rng + ?Sized>(
    inputs: &[ParamVector],
    targets: &[f64],
    family: KernelFamily,
    config: &FitConfig,
    warm_start: Option<&Hyperparameters>,
    rng: &mut R,
) -> Result<FitOutcome> {
    if inputs.len() != targets.len() {
        return Err(Error::DimensionMismatch {
            expected: inputs.len(),
            got: targets.len(),
        });
    }
    if inputs.len() < 2 {
        return Err(Error::InsufficientData {
            required: 2,
            got: inputs.len(),
        });
    }
    let dim = inputs[0].dim();
    if let Some(bad) = inputs.iter().find(|x| x.dim() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: bad.dim(),
        });
    }
    let n_fit = config.max_points.map_or(inputs.len(), |m| m.clamp(2, inputs.len()));
    let fit_inputs = &inputs[..n_fit];
    let fit_targets = &targets[..n_fit];

    let prior_mean = match config.mean {
        MeanMode::Constant => targets.iter().sum::<f64>() / targets.len() as f64,
        MeanMode::Zero => 0.0,
    };
    let centered: Vec<f64> = fit_targets.iter().map(|y| y - prior_mean).collect();

    let fit_period = matches!(
        family,
        KernelFamily::Periodic {
            fixed_period: false,
            ..
        }
    );
    let layout = Layout {
        dim,
        fit_noise: config.fixed_noise.is_none(),
        fit_period,
    };

    let mut pair_terms = vec![Vec::with_capacity(n_fit * (n_fit - 1) / 2); dim];
    for i in 0..n_fit {
        for j in 0..i {
            for (d, terms) in pair_terms.iter_mut().enumerate() {
                let (a, b) = (fit_inputs[i][d], fit_inputs[j][d]);
                terms.push(if fit_period { a - b } else { family.component(a, b) });
            }
        }
    }
    let problem = Problem {
        family,
        config,
        layout,
        n: n_fit,
        pair_terms,
        centered,
    };

    let default_start = {
        let var = variance(targets).max(f64::MIN_POSITIVE);
        let kernel = KernelSpec {
            family,
            lengthscales: vec![1.0; dim],
            output_scale: var.clamp(config.output_scale_bounds.0, config.output_scale_bounds.1),
        };
        Hyperparameters {
            kernel,
            noise_variance: config
                .fixed_noise
                .unwrap_or((1e-2 * var).clamp(config.noise_bounds.0, config.noise_bounds.1)),
            prior_mean,
        }
    };
    let start_hyper = warm_start
        .filter(|h| h.kernel.dim() == dim)
        .cloned()
        .unwrap_or_else(|| default_start.clone());

    if problem.centered.iter().all(|&r| r == 0.0) && targets.iter().all(|&y| y == targets[0]) {
        let mut kernel = start_hyper.kernel.clone();
        kernel.family = match (family, kernel.family) {
            (KernelFamily::Periodic { .. }, KernelFamily::Periodic { .. }) if fit_period => {
                kernel.family
            }
            _ => family,
        };
        kernel.output_scale = config.output_scale_bounds.0;
        let hyper = Hyperparameters {
            kernel,
            noise_variance: config.fixed_noise.unwrap_or(config.noise_bounds.0),
            prior_mean,
        };
        let log_likelihood = problem.log_likelihood(&hyper.kernel, hyper.noise_variance);
        return Ok(FitOutcome {
            hyper,
            log_likelihood,
        });
    }

    let objective = |u: &[f64]| {
        let (kernel, noise) = problem.decode(u);
        -problem.log_likelihood(&kernel, noise)
    };

    let k = problem.layout.len();
    let mut best: Option<(Vec<f64>, f64)> = None;
    let restarts = if warm_start.is_some() {
        config.warm_restarts
    } else {
        config.restarts
    };
    for restart in 0..restarts.max(1) {
        let (start, step) = if restart == 0 {
            (problem.encode(&start_hyper), if warm_start.is_some() { 0.05 } else { 0.1 })
        } else {
            ((0..k).map(|_| rng.random::<f64>()).collect(), 0.1)
        };
        let result = minimize_bounded(objective, &start, step, config.max_evals, 1e-9);
        if best.as_ref().is_none_or(|(_, v)| result.value < *v) {
            best = Some((result.x, result.value));
        }
    }
    let (u, value) = best.expect("at least one restart");
    if !value.is_finite() {
        return Err(Error::NotPositiveDefinite { jitter: f64::NAN });
    }
    let (kernel, noise_variance) = problem.decode(&u);
    Ok(FitOutcome {
        hyper: Hyperparameters {
            kernel,
            noise_variance,
            prior_mean,
        },
        log_likelihood: -value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gp::Smoothness;
    use crate::rng::stream;
    use std::f64::consts::TAU;

    fn pts(v: &[f64]) -> Vec<ParamVector> {
        v.iter().map(|&x| ParamVector::new(vec![x])).collect()
    }

    #[test]
    fn fixed_period_is_kept() {
        let x = pts(&[0.1, 1.0, 2.0, 3.5, 5.0]);
        let y: Vec<f64> = x.iter().map(|p| (2.0 * p[0]).sin()).collect();
        let out = fit_hyperparameters(
            &x,
            &y,
            KernelFamily::periodic(),
            &FitConfig::default(),
            None,
            &mut stream(1, 0),
        )
        .unwrap();
        match out.hyper.kernel.family {
            KernelFamily::Periodic { period, fixed_period } => {
                assert_eq!(period, TAU);
                assert!(fixed_period);
            }
            _ => panic!("family changed"),
        }
    }

    #[test]
    fn free_period_moves() {
        let x: Vec<ParamVector> = (0..30).map(|i| ParamVector::new(vec![i as f64 * 0.2])).collect();
        let y: Vec<f64> = x.iter().map(|p| (p[0] * TAU / 2.0).sin()).collect();
        let family = KernelFamily::Periodic {
            period: TAU,
            fixed_period: false,
        };
        let free =
            fit_hyperparameters(&x, &y, family, &FitConfig::default(), None, &mut stream(2, 0))
                .unwrap();
        let fixed = fit_hyperparameters(
            &x,
            &y,
            KernelFamily::periodic(),
            &FitConfig::default(),
            None,
            &mut stream(2, 0),
        )
        .unwrap();
        let KernelFamily::Periodic { period, .. } = free.hyper.kernel.family else {
            panic!()
        };
        assert_ne!(period, TAU);
        assert!(free.log_likelihood > fixed.log_likelihood);
    }

    #[test]
    fn identical_targets_are_degenerate() {
        let x = pts(&[1.0, 1.0]);
        let cfg = FitConfig::default();
        let out = fit_hyperparameters(
            &x,
            &[0.3, 0.3],
            KernelFamily::matern52(),
            &cfg,
            None,
            &mut stream(3, 0),
        )
        .unwrap();
        assert_eq!(out.hyper.noise_variance, cfg.noise_bounds.0);
        assert_eq!(out.hyper.kernel.output_scale, cfg.output_scale_bounds.0);
        assert_eq!(out.hyper.prior_mean, 0.3);
    }

    #[test]
    fn too_few_points() {
        let r = fit_hyperparameters(
            &pts(&[1.0]),
            &[0.0],
            KernelFamily::matern52(),
            &FitConfig::default(),
            None,
            &mut stream(3, 0),
        );
        assert!(matches!(r, Err(Error::InsufficientData { .. })));
    }

    #[test]
    fn likelihood_matches_model() {
        let x = pts(&[0.1, 1.0, 2.0, 3.5, 5.0]);
        let y = [0.3, -0.2, 0.8, 0.1, -0.5];
        let cfg = FitConfig::default();
        let out = fit_hyperparameters(
            &x,
            &y,
            KernelFamily::Matern {
                nu: Smoothness::ThreeHalves,
            },
            &cfg,
            None,
            &mut stream(4, 0),
        )
        .unwrap();
        let model = out.hyper.condition(&x, &y).unwrap();
        assert!((model.log_marginal_likelihood() - out.log_likelihood).abs() < 1e-8);
    }

    #[test]
    fn deterministic_given_seed() {
        let x = pts(&[0.1, 1.0, 2.0, 3.5, 5.0]);
        let y = [0.3, -0.2, 0.8, 0.1, -0.5];
        let run = |seed| {
            fit_hyperparameters(
                &x,
                &y,
                KernelFamily::periodic(),
                &FitConfig::default(),
                None,
                &mut stream(seed, 0),
            )
            .unwrap()
            .hyper
        };
        assert_eq!(run(9), run(9));
    }

    #[test]
    fn pinned_noise() {
        let x = pts(&[0.1, 1.0, 2.0, 3.5, 5.0]);
        let y = [0.3, -0.2, 0.8, 0.1, -0.5];
        let cfg = FitConfig {
            fixed_noise: Some(0.04),
            ..FitConfig::default()
        };
        let out =
            fit_hyperparameters(&x, &y, KernelFamily::periodic(), &cfg, None, &mut stream(5, 0))
                .unwrap();
        assert_eq!(out.hyper.noise_variance, 0.04);
    }
}
