//! Experiment configuration files.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::acquisition::{AcquisitionOptimizer, DEFAULT_LCB_BETA, DEFAULT_LSR_BETA};
use crate::engine::{default_low_shot_fit, Method, RunConfig};
use crate::error::{Error, Result};
use crate::gp::{FitConfig, KernelFamily};
use crate::objective::ObjectiveSpec;

/// Where the objective comes from: a file (relative to the experiment
/// config) or an inline document, in either case a circuit or synthetic
/// objective config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectiveRef {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inline: Option<serde_json::Value>,
    /// Overrides the single-shot variance `σ₁²` of the referenced config.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_scale: Option<f64>,
}

impl ObjectiveRef {
    pub fn resolve(&self, base_dir: &Path) -> Result<ObjectiveSpec> {
        let mut spec = match (&self.file, &self.inline) {
            (Some(file), None) => ObjectiveSpec::load(&base_dir.join(file))?,
            (None, Some(value)) => ObjectiveSpec::from_value(value.clone(), Path::new("<inline objective>"))?,
            _ => {
                return Err(Error::InvalidConfig(
                    "objective needs exactly one of `file` or `inline`".into(),
                ))
            }
        };
        if let Some(scale) = self.noise_scale {
            spec = match spec.kind {
                crate::objective::ObjectiveKind::Synthetic(s) => ObjectiveSpec::synthetic(s, scale)?,
                crate::objective::ObjectiveKind::Circuit(c) => ObjectiveSpec::circuit(c, scale)?,
            };
        }
        Ok(spec)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArmKernel {
    /// Matérn ν = 5/2.
    Matern,
    /// Periodic with the period pinned to 2π.
    Periodic,
}

impl ArmKernel {
    pub fn family(self) -> KernelFamily {
        match self {
            ArmKernel::Matern => KernelFamily::matern52(),
            ArmKernel::Periodic => KernelFamily::periodic(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArmConfig {
    pub name: String,
    pub method: Method,
    pub kernel: ArmKernel,
    pub gamma: f64,
    /// Shot ratio `s_low / s̄` (residual arms only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    /// Defaults to 4 for vanilla arms and 25 for residual arms.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub objective: ObjectiveRef,
    pub arms: Vec<ArmConfig>,
    pub shots_high: u64,
    pub budget: u64,
    pub replications: usize,
    pub seed: u64,
    pub out_dir: PathBuf,
    #[serde(default)]
    pub pin_noise: bool,
    #[serde(default)]
    pub fit: FitConfig,
    #[serde(default = "default_low_shot_fit")]
    pub low_shot_fit: FitConfig,
    #[serde(default)]
    pub acquisition: AcquisitionOptimizer,
}

/// Hex SHA-256 of the raw config bytes.
pub fn config_hash(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl ExperimentConfig {
    /// Parses and validates a config. `source` labels diagnostics.
    pub fn from_slice(bytes: &[u8], source: &Path) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_slice(bytes).map_err(|e| Error::Malformed {
            path: source.to_path_buf(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications < 1 {
            return Err(Error::InvalidConfig("replications must be at least 1".into()));
        }
        if self.arms.is_empty() {
            return Err(Error::InvalidConfig("no arms configured".into()));
        }
        let mut names = HashSet::new();
        for arm in &self.arms {
            if arm.name.is_empty()
                || !arm
                    .name
                    .chars()
                    .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
            {
                return Err(Error::InvalidConfig(format!(
                    "arm name {:?} must be nonempty and use only [A-Za-z0-9._-]",
                    arm.name
                )));
            }
            if !names.insert(arm.name.as_str()) {
                return Err(Error::InvalidConfig(format!("duplicate arm name {:?}", arm.name)));
            }
            // surfaces budget/arm inconsistencies before anything runs
            self.run_config(arm)?.ledger()?;
        }
        Ok(())
    }

    /// Engine configuration for one arm.
    pub fn run_config(&self, arm: &ArmConfig) -> Result<RunConfig> {
        let (shots_low, default_beta) = match arm.method {
            Method::Vanilla => {
                if arm.r.is_some_and(|r| r != 1.0) {
                    return Err(Error::InvalidConfig(format!(
                        "arm {:?}: vanilla arms take no shot ratio r",
                        arm.name
                    )));
                }
                (None, DEFAULT_LCB_BETA)
            }
            Method::Lsr => {
                let r = arm.r.ok_or_else(|| {
                    Error::InvalidConfig(format!("arm {:?}: residual arms need r", arm.name))
                })?;
                if !(r > 0.0 && r <= 1.0) {
                    return Err(Error::InvalidConfig(format!(
                        "arm {:?}: r = {r} outside (0, 1]",
                        arm.name
                    )));
                }
                let low = (r * self.shots_high as f64).round() as u64;
                if low < 1 {
                    return Err(Error::InvalidConfig(format!(
                        "arm {:?}: r·s̄ rounds to zero shots",
                        arm.name
                    )));
                }
                (Some(low), DEFAULT_LSR_BETA)
            }
        };
        Ok(RunConfig {
            method: arm.method,
            kernel: arm.kernel.family(),
            gamma: arm.gamma,
            budget: self.budget,
            shots_high: self.shots_high,
            shots_low,
            beta: arm.beta.unwrap_or(default_beta),
            pin_noise: self.pin_noise,
            fit: self.fit.clone(),
            low_shot_fit: self.low_shot_fit.clone(),
            acquisition: self.acquisition,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"{
        "objective": {"inline": {"dimension": 1, "amplitudes": [1.0], "phases": [0.0], "offset": 0.0, "noise_scale": 1.0}},
        "arms": [{"name": "a", "method": "vanilla", "kernel": "periodic", "gamma": 0.1}],
        "shots_high": 10, "budget": 100, "replications": 2, "seed": 1, "out_dir": "out"
    }"#;

    #[test]
    fn parses_and_resolves() {
        let cfg = ExperimentConfig::from_slice(BASE.as_bytes(), Path::new("x.json")).unwrap();
        let rc = cfg.run_config(&cfg.arms[0]).unwrap();
        assert_eq!(rc.beta, DEFAULT_LCB_BETA);
        assert_eq!(cfg.objective.resolve(Path::new(".")).unwrap().dim(), 1);
    }

    #[test]
    fn rejects_unknown_fields_with_location() {
        let bad = BASE.replace("\"seed\": 1", "\"seed\": 1, \"sede\": 2");
        let err = ExperimentConfig::from_slice(bad.as_bytes(), Path::new("x.json")).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("sede") && msg.contains("line"), "{msg}");
    }

    #[test]
    fn rejects_duplicates_and_bad_budgets() {
        let dup = BASE.replace(
            r#"[{"name": "a", "method": "vanilla", "kernel": "periodic", "gamma": 0.1}]"#,
            r#"[{"name": "a", "method": "vanilla", "kernel": "periodic", "gamma": 0.1},
                {"name": "a", "method": "vanilla", "kernel": "matern", "gamma": 0.1}]"#,
        );
        assert!(ExperimentConfig::from_slice(dup.as_bytes(), Path::new("x")).is_err());
        let tiny = BASE.replace("\"budget\": 100", "\"budget\": 5");
        assert!(ExperimentConfig::from_slice(tiny.as_bytes(), Path::new("x")).is_err());
        let no_r = BASE.replace("\"vanilla\"", "\"lsr\"");
        assert!(ExperimentConfig::from_slice(no_r.as_bytes(), Path::new("x")).is_err());
        let zero = BASE.replace("\"replications\": 2", "\"replications\": 0");
        assert!(ExperimentConfig::from_slice(zero.as_bytes(), Path::new("x")).is_err());
    }

    #[test]
    fn hash_is_stable() {
        assert_eq!(config_hash(b"abc"), config_hash(b"abc"));
        assert_ne!(config_hash(b"abc"), config_hash(b"abd"));
        assert_eq!(config_hash(b"").len(), 64);
    }
}
