//! Lower-confidence-bound acquisition functions and their optimizer.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gp::GpModel;
use crate::param::ParamVector;
use crate::search::PatternSearch;

pub const DEFAULT_LCB_BETA: f64 = 4.0;
pub const DEFAULT_LSR_BETA: f64 = 25.0;

/// `μ - √β·σ`.
pub fn lcb_value(mean: f64, variance: f64, beta: f64) -> Result<f64> {
    if variance < 0.0 {
        return Err(Error::NegativeVariance(variance));
    }
    Ok(mean - beta.sqrt() * variance.sqrt())
}

/// `(μ_g + μ_ε) - √β·σ_ε`. The low-shot model's own variance never enters.
pub fn lsr_lcb_value(low_mean: f64, residual_mean: f64, residual_variance: f64, beta: f64) -> Result<f64> {
    if residual_variance < 0.0 {
        return Err(Error::NegativeVariance(residual_variance));
    }
    Ok((low_mean + residual_mean) - beta.sqrt() * residual_variance.sqrt())
}

/// Posterior mean of the low-shot GP, frozen once the low-shot budget is spent.
#[derive(Debug, Clone)]
pub struct FrozenMean {
    model: GpModel,
}

impl FrozenMean {
    pub fn new(model: GpModel) -> Self {
        FrozenMean { model }
    }

    pub fn value(&self, theta: &[f64]) -> f64 {
        self.model.mean_at(theta)
    }

    pub fn model(&self) -> &GpModel {
        &self.model
    }
}

/// An acquisition bound to the model(s) it reads.
#[derive(Debug, Clone, Copy)]
pub enum Acquisition<'a> {
    Lcb {
        model: &'a GpModel,
        beta: f64,
    },
    LsrLcb {
        low_shot: &'a FrozenMean,
        residual: &'a GpModel,
        beta: f64,
    },
}

fn check_beta(beta: f64) -> Result<()> {
    if beta >= 0.0 && beta.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidHyperparameter { name: "beta", value: beta })
    }
}

impl<'a> Acquisition<'a> {
    pub fn lcb(model: &'a GpModel, beta: f64) -> Result<Self> {
        check_beta(beta)?;
        Ok(Acquisition::Lcb { model, beta })
    }

    pub fn lsr_lcb(low_shot: &'a FrozenMean, residual: &'a GpModel, beta: f64) -> Result<Self> {
        check_beta(beta)?;
        if low_shot.model().dim() != residual.dim() {
            return Err(Error::DimensionMismatch {
                expected: low_shot.model().dim(),
                got: residual.dim(),
            });
        }
        Ok(Acquisition::LsrLcb {
            low_shot,
            residual,
            beta,
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            Acquisition::Lcb { model, .. } => model.dim(),
            Acquisition::LsrLcb { residual, .. } => residual.dim(),
        }
    }

    /// Acquisition value at `theta` (lower is better).
    pub fn value(&self, theta: &[f64]) -> f64 {
        // variances are clamped at 0 by the model, so these cannot fail
        match *self {
            Acquisition::Lcb { model, beta } => {
                let (m, v) = model.predict(theta);
                m - beta.sqrt() * v.sqrt()
            }
            Acquisition::LsrLcb {
                low_shot,
                residual,
                beta,
            } => {
                let (m, v) = residual.predict(theta);
                (low_shot.value(theta) + m) - beta.sqrt() * v.sqrt()
            }
        }
    }

    /// Predicted objective: `μ` for LCB, `μ_g + μ_ε` for the residual form.
    pub fn predicted_mean(&self, theta: &[f64]) -> f64 {
        match *self {
            Acquisition::Lcb { model, .. } => model.mean_at(theta),
            Acquisition::LsrLcb {
                low_shot, residual, ..
            } => low_shot.value(theta) + residual.mean_at(theta),
        }
    }
}

/// Random candidates followed by pattern-search refinement of the best few.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AcquisitionOptimizer {
    pub candidates: usize,
    pub refine: usize,
    pub initial_step: f64,
    pub shrink: f64,
    pub iterations: usize,
    pub min_step: f64,
}

impl Default for AcquisitionOptimizer {
    fn default() -> Self {
        let ps = PatternSearch::default();
        AcquisitionOptimizer {
            candidates: 256,
            refine: 8,
            initial_step: ps.initial_step,
            shrink: ps.shrink,
            iterations: ps.iterations,
            min_step: ps.min_step,
        }
    }
}

impl AcquisitionOptimizer {
    /// Approximate argmin over `[0, 2π)^d`. Deterministic given `rng`; ties
    /// go to the earliest-generated candidate.
    pub fn optimize<R: Rng + ?Sized>(&self, acq: &Acquisition<'_>, rng: &mut R) -> ParamVector {
        let dim = acq.dim();
        let n = self.candidates.max(1);
        let candidates: Vec<ParamVector> = (0..n).map(|_| ParamVector::uniform(dim, rng)).collect();
        let values: Vec<f64> = candidates.iter().map(|c| acq.value(c.as_slice())).collect();

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));

        let search = PatternSearch {
            initial_step: self.initial_step,
            shrink: self.shrink,
            iterations: self.iterations,
            min_step: self.min_step,
        };
        let mut f = |t: &[f64]| acq.value(t);
        let mut best: Option<(Vec<f64>, f64)> = None;
        for &idx in order.iter().take(self.refine.max(1)) {
            let (x, fx) = search.minimize(&mut f, candidates[idx].as_slice().to_vec(), values[idx]);
            if best.as_ref().is_none_or(|(_, v)| fx < *v) {
                best = Some((x, fx));
            }
        }
        let (x, _) = best.expect("at least one candidate");
        ParamVector::new(x).wrapped()
    }
}
