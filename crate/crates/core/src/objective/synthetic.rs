use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// On-disk form of a synthetic objective.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticConfig {
    pub dimension: usize,
    pub amplitudes: Vec<f64>,
    pub phases: Vec<f64>,
    pub offset: f64,
    pub noise_scale: f64,
}

/// `J(θ) = c + Σ_i a_i cos(θ_i - φ_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticObjective {
    amplitudes: Vec<f64>,
    phases: Vec<f64>,
    offset: f64,
}

impl SyntheticObjective {
    pub fn new(amplitudes: Vec<f64>, phases: Vec<f64>, offset: f64) -> Result<Self> {
        if amplitudes.is_empty() || amplitudes.len() != phases.len() {
            return Err(Error::InvalidObjective(format!(
                "need one phase per amplitude (got {} amplitudes, {} phases)",
                amplitudes.len(),
                phases.len()
            )));
        }
        if amplitudes.iter().chain(&phases).chain([&offset]).any(|v| !v.is_finite()) {
            return Err(Error::InvalidObjective("non-finite coefficient".into()));
        }
        Ok(SyntheticObjective {
            amplitudes,
            phases,
            offset,
        })
    }

    pub fn from_config(cfg: &SyntheticConfig) -> Result<Self> {
        if cfg.amplitudes.len() != cfg.dimension {
            return Err(Error::InvalidObjective(format!(
                "dimension {} but {} amplitudes",
                cfg.dimension,
                cfg.amplitudes.len()
            )));
        }
        Self::new(cfg.amplitudes.clone(), cfg.phases.clone(), cfg.offset)
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn value(&self, theta: &[f64]) -> f64 {
        self.offset
            + self
                .amplitudes
                .iter()
                .zip(&self.phases)
                .zip(theta)
                .map(|((a, p), t)| a * (t - p).cos())
                .sum::<f64>()
    }

    /// Closed-form minimum `c - Σ|a_i|` and a minimizer.
    pub fn minimum(&self) -> (f64, Vec<f64>) {
        let value = self.offset - self.amplitudes.iter().map(|a| a.abs()).sum::<f64>();
        let theta = self
            .amplitudes
            .iter()
            .zip(&self.phases)
            .map(|(a, p)| {
                let t = if *a >= 0.0 { p + std::f64::consts::PI } else { *p };
                crate::param::wrap_angle(t)
            })
            .collect();
        (value, theta)
    }
}
