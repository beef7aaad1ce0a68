//! Shot-noisy objectives: a synthetic cosine sum and layered ansatz circuits.
//!
//! Observations follow `y = J(θ) + ε`, `ε ~ N(0, σ₁² / s)` for `s` shots.

mod circuit;
mod ground_truth;
mod synthetic;

use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

pub use circuit::{
    expectation, Ansatz, CircuitConfig, CircuitObjective, Complex, Hamiltonian, PauliString,
    PauliTerm, TermConfig, MAX_QUBITS,
};
pub use ground_truth::{GroundTruth, GroundTruthMode, EIGEN_DECOMPOSITION_MAX_QUBITS};
pub use synthetic::{SyntheticConfig, SyntheticObjective};

use crate::error::{Error, Result};
use crate::param::ParamVector;

#[derive(Debug, Clone, PartialEq)]
pub enum ObjectiveKind {
    Synthetic(SyntheticObjective),
    Circuit(CircuitObjective),
}

/// An objective `J(θ)` together with its single-shot variance `σ₁²`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveSpec {
    pub kind: ObjectiveKind,
    pub noise_scale: f64,
}

/// One noisy observation. `true_value` is for analysis only and never
/// reaches the optimizer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShotSample {
    pub theta: ParamVector,
    pub shots: u64,
    pub value: f64,
    pub true_value: f64,
}

impl ObjectiveSpec {
    pub fn synthetic(obj: SyntheticObjective, noise_scale: f64) -> Result<Self> {
        Self::checked(ObjectiveKind::Synthetic(obj), noise_scale)
    }

    pub fn circuit(obj: CircuitObjective, noise_scale: f64) -> Result<Self> {
        Self::checked(ObjectiveKind::Circuit(obj), noise_scale)
    }

    fn checked(kind: ObjectiveKind, noise_scale: f64) -> Result<Self> {
        if !(noise_scale >= 0.0 && noise_scale.is_finite()) {
            return Err(Error::InvalidObjective(format!(
                "noise_scale must be a nonnegative number, got {noise_scale}"
            )));
        }
        Ok(ObjectiveSpec { kind, noise_scale })
    }

    pub fn from_synthetic_config(cfg: &SyntheticConfig) -> Result<Self> {
        Self::synthetic(SyntheticObjective::from_config(cfg)?, cfg.noise_scale)
    }

    pub fn from_circuit_config(cfg: &CircuitConfig, noise_scale: Option<f64>) -> Result<Self> {
        let scale = noise_scale.or(cfg.noise_scale).unwrap_or(1.0);
        Self::circuit(CircuitObjective::from_config(cfg)?, scale)
    }

    /// Loads a circuit (`qubits`/`layers`/`terms`) or synthetic
    /// (`dimension`/`amplitudes`/...) config, telling them apart by their fields.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| Error::Malformed {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        Self::from_value(value, path)
    }

    /// Like [`load`](Self::load) for an already parsed document; `source`
    /// only labels errors.
    pub fn from_value(value: serde_json::Value, source: &Path) -> Result<Self> {
        let malformed = |e: serde_json::Error| Error::Malformed {
            path: source.to_path_buf(),
            message: e.to_string(),
        };
        if value.get("qubits").is_some() {
            let cfg: CircuitConfig = serde_json::from_value(value).map_err(malformed)?;
            Self::from_circuit_config(&cfg, None)
        } else {
            let cfg: SyntheticConfig = serde_json::from_value(value).map_err(malformed)?;
            Self::from_synthetic_config(&cfg)
        }
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            ObjectiveKind::Synthetic(s) => s.dim(),
            ObjectiveKind::Circuit(c) => c.dim(),
        }
    }

    fn check_dim(&self, theta: &ParamVector) -> Result<()> {
        if theta.dim() == self.dim() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: theta.dim(),
            })
        }
    }

    /// Noise-free `J(θ)`.
    pub fn true_value(&self, theta: &ParamVector) -> Result<f64> {
        self.check_dim(theta)?;
        Ok(self.value_unchecked(theta.as_slice()))
    }

    pub(crate) fn value_unchecked(&self, theta: &[f64]) -> f64 {
        match &self.kind {
            ObjectiveKind::Synthetic(s) => s.value(theta),
            ObjectiveKind::Circuit(c) => c.energy(theta),
        }
    }

    /// Variance of a single observation at `shots` shots.
    pub fn noise_variance(&self, shots: u64) -> f64 {
        self.noise_scale / shots as f64
    }

    /// Draws `y(θ, s) = J(θ) + ε(s)`.
    pub fn evaluate<R: Rng + ?Sized>(
        &self,
        theta: &ParamVector,
        shots: u64,
        rng: &mut R,
    ) -> Result<ShotSample> {
        if shots < 1 {
            return Err(Error::ZeroShots);
        }
        let true_value = self.true_value(theta)?;
        let z: f64 = rng.sample(StandardNormal);
        let value = true_value + self.noise_variance(shots).sqrt() * z;
        Ok(ShotSample {
            theta: theta.clone(),
            shots,
            value,
            true_value,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn cosine() -> ObjectiveSpec {
        ObjectiveSpec::synthetic(
            SyntheticObjective::new(vec![1.0, 0.5], vec![0.3, 1.0], 0.2).unwrap(),
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn noiseless_limit() {
        let mut obj = cosine();
        obj.noise_scale = 0.0;
        let theta = ParamVector::new(vec![1.0, 2.0]);
        let s = obj.evaluate(&theta, 7, &mut stream(0, 0)).unwrap();
        assert_eq!(s.value, obj.true_value(&theta).unwrap());
    }

    #[test]
    fn determinism() {
        let obj = cosine();
        let theta = ParamVector::new(vec![1.0, 2.0]);
        let a = obj.evaluate(&theta, 100, &mut stream(5, 1)).unwrap();
        let b = obj.evaluate(&theta, 100, &mut stream(5, 1)).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
    }

    #[test]
    fn zero_shots_rejected() {
        let obj = cosine();
        let theta = ParamVector::new(vec![1.0, 2.0]);
        assert!(matches!(
            obj.evaluate(&theta, 0, &mut stream(0, 0)),
            Err(Error::ZeroShots)
        ));
        assert!(obj.true_value(&ParamVector::new(vec![1.0])).is_err());
    }

    #[test]
    fn sample_variance_at_ten_thousand_shots() {
        let obj = cosine();
        let theta = ParamVector::new(vec![1.0, 2.0]);
        let mut rng = stream(11, 0);
        let n = 100_000;
        let ys: Vec<f64> = (0..n)
            .map(|_| obj.evaluate(&theta, 10_000, &mut rng).unwrap().value)
            .collect();
        let mean = ys.iter().sum::<f64>() / n as f64;
        let var = ys.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((var / 1e-4 - 1.0).abs() < 0.05, "{var}");
    }

    #[test]
    fn load_detects_kind() {
        let dir = tempfile::tempdir().unwrap();
        let c = dir.path().join("c.json");
        std::fs::write(&c, r#"{"qubits":1,"layers":1,"terms":[{"coeff":1.0,"pauli":"Z"}]}"#)
            .unwrap();
        assert!(matches!(ObjectiveSpec::load(&c).unwrap().kind, ObjectiveKind::Circuit(_)));
        let s = dir.path().join("s.json");
        std::fs::write(
            &s,
            r#"{"dimension":1,"amplitudes":[1.0],"phases":[0.0],"offset":0.0,"noise_scale":0.5}"#,
        )
        .unwrap();
        let obj = ObjectiveSpec::load(&s).unwrap();
        assert_eq!(obj.noise_scale, 0.5);
        std::fs::write(&s, r#"{"dimension":1,"amplitudes":[1.0]}"#).unwrap();
        assert!(matches!(ObjectiveSpec::load(&s), Err(Error::Malformed { .. })));
    }
}
