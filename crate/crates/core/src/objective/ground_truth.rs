//! Reference minima for regret computation.

use nalgebra::SymmetricEigen;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{ObjectiveKind, ObjectiveSpec};
use crate::error::{Error, Result};
use crate::param::ParamVector;
use crate::search::PatternSearch;

/// Dense eigendecomposition is limited to this many qubits.
pub const EIGEN_DECOMPOSITION_MAX_QUBITS: usize = 12;
const GRID_MAX_DIM: usize = 3;
const GRID_POINTS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroundTruthMode {
    /// Closed form.
    Exact,
    /// Dense grid plus local refinement.
    Grid,
    /// Multistart local search (dimension too large for a grid).
    Search,
    /// Only the Hamiltonian's eigenvalue bounds are available.
    EigenOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub mode: GroundTruthMode,
    /// Minimum of `J` over the parameter box (`None` in `EigenOnly` mode).
    pub value: Option<f64>,
    pub theta: Option<ParamVector>,
    /// Smallest Hamiltonian eigenvalue (circuits only).
    pub eigen_lower: Option<f64>,
    /// Largest Hamiltonian eigenvalue (circuits only).
    pub eigen_upper: Option<f64>,
}

impl ObjectiveSpec {
    /// Reference minimum `J*`.
    ///
    /// Synthetic objectives are solved in closed form. Circuits get dense
    /// eigenvalue bounds plus a 64-per-axis grid minimum (refined by pattern
    /// search) when `d ≤ 3`; larger circuits report the eigen bounds only.
    pub fn ground_truth_minimum(&self) -> Result<GroundTruth> {
        match &self.kind {
            ObjectiveKind::Synthetic(s) => {
                let (value, theta) = s.minimum();
                Ok(GroundTruth {
                    mode: GroundTruthMode::Exact,
                    value: Some(value),
                    theta: Some(ParamVector::new(theta)),
                    eigen_lower: None,
                    eigen_upper: None,
                })
            }
            ObjectiveKind::Circuit(c) => {
                let (lo, hi) = self.eigen_bounds()?;
                if c.dim() > GRID_MAX_DIM {
                    return Ok(GroundTruth {
                        mode: GroundTruthMode::EigenOnly,
                        value: None,
                        theta: None,
                        eigen_lower: Some(lo),
                        eigen_upper: Some(hi),
                    });
                }
                let (theta, value) = self.grid_minimum(GRID_POINTS);
                Ok(GroundTruth {
                    mode: GroundTruthMode::Grid,
                    value: Some(value),
                    theta: Some(ParamVector::new(theta)),
                    eigen_lower: Some(lo),
                    eigen_upper: Some(hi),
                })
            }
        }
    }

    /// Like [`ground_truth_minimum`](Self::ground_truth_minimum), but falls back
    /// to a seeded multistart pattern search when the grid is refused, so an
    /// ansatz-reachable reference value is always available.
    pub fn reachable_minimum(&self, starts: usize, seed: u64) -> Result<GroundTruth> {
        let mut gt = self.ground_truth_minimum()?;
        if gt.mode == GroundTruthMode::EigenOnly {
            let (theta, value) = self.multistart_minimum(starts.max(1), seed);
            gt.mode = GroundTruthMode::Search;
            gt.value = Some(value);
            gt.theta = Some(ParamVector::new(theta));
        }
        Ok(gt)
    }

    /// Smallest and largest eigenvalue of the circuit Hamiltonian.
    pub fn eigen_bounds(&self) -> Result<(f64, f64)> {
        let ObjectiveKind::Circuit(c) = &self.kind else {
            return Err(Error::InvalidObjective(
                "eigen bounds need a circuit objective".into(),
            ));
        };
        if c.hamiltonian.qubits() > EIGEN_DECOMPOSITION_MAX_QUBITS {
            return Err(Error::ObjectiveTooLarge(format!(
                "{} qubits exceed the dense eigendecomposition limit",
                c.hamiltonian.qubits()
            )));
        }
        let eig = SymmetricEigen::new(c.hamiltonian.to_dense());
        let lo = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = eig.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok((lo, hi))
    }

    fn refine(&self, theta: Vec<f64>, value: f64, step: f64) -> (Vec<f64>, f64) {
        let search = PatternSearch {
            initial_step: step,
            shrink: 0.5,
            iterations: 60,
            min_step: 1e-12,
        };
        search.minimize(&mut |t: &[f64]| self.value_unchecked(t), theta, value)
    }

    fn grid_minimum(&self, points: usize) -> (Vec<f64>, f64) {
        let d = self.dim();
        let h = std::f64::consts::TAU / points as f64;
        let total = points.pow(d as u32);
        let mut best = (vec![0.0; d], f64::INFINITY);
        let mut theta = vec![0.0; d];
        for flat in 0..total {
            let mut rem = flat;
            for t in theta.iter_mut() {
                *t = (rem % points) as f64 * h;
                rem /= points;
            }
            let v = self.value_unchecked(&theta);
            if v < best.1 {
                best = (theta.clone(), v);
            }
        }
        self.refine(best.0, best.1, h)
    }

    fn multistart_minimum(&self, starts: usize, seed: u64) -> (Vec<f64>, f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut best = (Vec::new(), f64::INFINITY);
        for _ in 0..starts {
            let x0 = ParamVector::uniform(self.dim(), &mut rng).into_inner();
            let f0 = self.value_unchecked(&x0);
            let (x, v) = self.refine(x0, f0, std::f64::consts::PI / 4.0);
            if v < best.1 {
                best = (x, v);
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::{CircuitConfig, CircuitObjective, SyntheticObjective, TermConfig};
    use std::f64::consts::PI;

    #[test]
    fn synthetic_closed_form() {
        let obj = ObjectiveSpec::synthetic(
            SyntheticObjective::new(vec![1.0, 1.0], vec![0.7, 4.0], 0.0).unwrap(),
            1.0,
        )
        .unwrap();
        let gt = obj.ground_truth_minimum().unwrap();
        assert_eq!(gt.mode, GroundTruthMode::Exact);
        assert_eq!(gt.value, Some(-2.0));
    }

    #[test]
    fn single_qubit_reaches_ground_state() {
        let cfg = CircuitConfig {
            qubits: 1,
            layers: 1,
            terms: vec![TermConfig {
                coeff: 1.0,
                pauli: "Z".into(),
            }],
            noise_scale: None,
        };
        let obj =
            ObjectiveSpec::circuit(CircuitObjective::from_config(&cfg).unwrap(), 1.0).unwrap();
        let gt = obj.ground_truth_minimum().unwrap();
        assert_eq!(gt.mode, GroundTruthMode::Grid);
        assert!((gt.value.unwrap() + 1.0).abs() < 1e-12);
        assert!((gt.theta.unwrap()[0] - PI).abs() < 1e-6);
        assert!((gt.eigen_lower.unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn large_dimension_reports_eigen_only() {
        let cfg = CircuitConfig {
            qubits: 2,
            layers: 2,
            terms: vec![TermConfig {
                coeff: 1.0,
                pauli: "ZZ".into(),
            }],
            noise_scale: None,
        };
        let obj =
            ObjectiveSpec::circuit(CircuitObjective::from_config(&cfg).unwrap(), 1.0).unwrap();
        let gt = obj.ground_truth_minimum().unwrap();
        assert_eq!(gt.mode, GroundTruthMode::EigenOnly);
        assert!(gt.value.is_none());
        let reach = obj.reachable_minimum(16, 0).unwrap();
        assert_eq!(reach.mode, GroundTruthMode::Search);
        assert!((reach.value.unwrap() + 1.0).abs() < 1e-9);
    }
}
