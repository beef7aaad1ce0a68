//! Stationary covariance functions: half-integer Matérn and the periodic
//! (exp-sine-squared) kernel, both with per-dimension lengthscales.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Matérn smoothness. Only the half-integer closed forms are supported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub enum Smoothness {
    Half,
    ThreeHalves,
    FiveHalves,
}

impl TryFrom<f64> for Smoothness {
    type Error = String;

    fn try_from(nu: f64) -> std::result::Result<Self, String> {
        if nu == 0.5 {
            Ok(Smoothness::Half)
        } else if nu == 1.5 {
            Ok(Smoothness::ThreeHalves)
        } else if nu == 2.5 {
            Ok(Smoothness::FiveHalves)
        } else {
            Err(format!("unsupported Matérn smoothness {nu}; expected 0.5, 1.5 or 2.5"))
        }
    }
}

impl From<Smoothness> for f64 {
    fn from(s: Smoothness) -> f64 {
        match s {
            Smoothness::Half => 0.5,
            Smoothness::ThreeHalves => 1.5,
            Smoothness::FiveHalves => 2.5,
        }
    }
}

impl Smoothness {
    /// Correlation as a function of the scaled distance `r`.
    #[inline]
    fn correlation(self, r: f64) -> f64 {
        match self {
            Smoothness::Half => (-r).exp(),
            Smoothness::ThreeHalves => {
                let s = 3f64.sqrt() * r;
                (1.0 + s) * (-s).exp()
            }
            Smoothness::FiveHalves => {
                let s = 5f64.sqrt() * r;
                (1.0 + s + 5.0 * r * r / 3.0) * (-s).exp()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum KernelFamily {
    Matern {
        nu: Smoothness,
    },
    /// `σ_f² exp(-2 Σ_i sin²(π (a_i - b_i) / p) / ℓ_i)`. When `fixed_period`
    /// is set the period stays at its value during fitting.
    Periodic {
        period: f64,
        fixed_period: bool,
    },
}

impl KernelFamily {
    pub fn matern52() -> Self {
        KernelFamily::Matern {
            nu: Smoothness::FiveHalves,
        }
    }

    /// Periodic family with the period pinned to 2π.
    pub fn periodic() -> Self {
        KernelFamily::Periodic {
            period: TAU,
            fixed_period: true,
        }
    }

    pub fn is_periodic(&self) -> bool {
        matches!(self, KernelFamily::Periodic { .. })
    }

    /// Per-dimension distance contribution for the pair `(a, b)`.
    ///
    /// Matérn: squared difference. Periodic: `sin²(π Δ / p)`.
    #[inline]
    pub(crate) fn component(&self, a: f64, b: f64) -> f64 {
        match *self {
            KernelFamily::Matern { .. } => {
                let d = a - b;
                d * d
            }
            KernelFamily::Periodic { period, .. } => {
                let s = (PI * (a - b) / period).sin();
                s * s
            }
        }
    }
}

/// Kernel family plus its hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    #[serde(flatten)]
    pub family: KernelFamily,
    pub lengthscales: Vec<f64>,
    pub output_scale: f64,
}

impl KernelSpec {
    pub fn new(family: KernelFamily, lengthscales: Vec<f64>, output_scale: f64) -> Result<Self> {
        let spec = KernelSpec {
            family,
            lengthscales,
            output_scale,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn matern(nu: Smoothness, lengthscales: Vec<f64>, output_scale: f64) -> Result<Self> {
        Self::new(KernelFamily::Matern { nu }, lengthscales, output_scale)
    }

    pub fn periodic(lengthscales: Vec<f64>, output_scale: f64) -> Result<Self> {
        Self::new(KernelFamily::periodic(), lengthscales, output_scale)
    }

    pub fn dim(&self) -> usize {
        self.lengthscales.len()
    }

    pub fn validate(&self) -> Result<()> {
        fn positive(name: &'static str, value: f64) -> Result<()> {
            if value > 0.0 && value.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidHyperparameter { name, value })
            }
        }
        if self.lengthscales.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: 0,
            });
        }
        for &l in &self.lengthscales {
            positive("lengthscale", l)?;
        }
        positive("output_scale", self.output_scale)?;
        if let KernelFamily::Periodic { period, .. } = self.family {
            positive("period", period)?;
        }
        Ok(())
    }

    /// `k(a, b)`. Errors on dimension mismatch or invalid hyperparameters.
    pub fn eval(&self, a: &[f64], b: &[f64]) -> Result<f64> {
        self.validate()?;
        for x in [a, b] {
            if x.len() != self.dim() {
                return Err(Error::DimensionMismatch {
                    expected: self.dim(),
                    got: x.len(),
                });
            }
        }
        Ok(self.eval_unchecked(a, b))
    }

    #[inline]
    pub(crate) fn eval_unchecked(&self, a: &[f64], b: &[f64]) -> f64 {
        match self.family {
            KernelFamily::Matern { .. } => {
                let mut r2 = 0.0;
                for ((&x, &y), &l) in a.iter().zip(b).zip(&self.lengthscales) {
                    let d = (x - y) / l;
                    r2 += d * d;
                }
                self.from_reduced(r2)
            }
            KernelFamily::Periodic { .. } => {
                let mut s = 0.0;
                for ((&x, &y), &l) in a.iter().zip(b).zip(&self.lengthscales) {
                    s += self.family.component(x, y) / l;
                }
                self.from_reduced(s)
            }
        }
    }

    /// Covariance from the lengthscale-weighted sum of per-dimension
    /// components: `Σ c_i / ℓ_i²` for Matérn, `Σ c_i / ℓ_i` for periodic.
    #[inline]
    pub(crate) fn from_reduced(&self, reduced: f64) -> f64 {
        match self.family {
            KernelFamily::Matern { nu } => self.output_scale * nu.correlation(reduced.sqrt()),
            KernelFamily::Periodic { .. } => self.output_scale * (-2.0 * reduced).exp(),
        }
    }

    /// Per-dimension weights applied to [`KernelFamily::component`].
    pub(crate) fn component_weights(&self) -> Vec<f64> {
        match self.family {
            KernelFamily::Matern { .. } => {
                self.lengthscales.iter().map(|l| 1.0 / (l * l)).collect()
            }
            KernelFamily::Periodic { .. } => self.lengthscales.iter().map(|l| 1.0 / l).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn self_covariance_is_output_scale() {
        let theta = [0.3, 4.0];
        for nu in [Smoothness::Half, Smoothness::ThreeHalves, Smoothness::FiveHalves] {
            let k = KernelSpec::matern(nu, vec![0.7, 2.0], 1.7).unwrap();
            assert_eq!(k.eval(&theta, &theta).unwrap(), 1.7);
        }
        let k = KernelSpec::periodic(vec![0.7, 2.0], 1.7).unwrap();
        assert_eq!(k.eval(&theta, &theta).unwrap(), 1.7);
    }

    #[test]
    fn exponential_kernel_value() {
        let k = KernelSpec::matern(Smoothness::Half, vec![1.0], 1.0).unwrap();
        let v = k.eval(&[0.0], &[1.0]).unwrap();
        assert!((v - 0.36787944117144233).abs() < 1e-15);
    }

    #[test]
    fn half_integer_closed_forms() {
        // r = 0.8 scaled distance
        let r: f64 = 0.8;
        let k32 = KernelSpec::matern(Smoothness::ThreeHalves, vec![1.0], 2.0).unwrap();
        let want = 2.0 * (1.0 + 3f64.sqrt() * r) * (-(3f64.sqrt()) * r).exp();
        assert!((k32.eval(&[0.0], &[r]).unwrap() - want).abs() < 1e-14);
        let k52 = KernelSpec::matern(Smoothness::FiveHalves, vec![2.0], 1.0).unwrap();
        let want =
            (1.0 + 5f64.sqrt() * r + 5.0 * r * r / 3.0) * (-(5f64.sqrt()) * r).exp();
        assert!((k52.eval(&[0.0], &[2.0 * r]).unwrap() - want).abs() < 1e-14);
    }

    #[test]
    fn periodic_is_2pi_invariant() {
        let k = KernelSpec::periodic(vec![0.5, 1.5, 3.0], 1.0).unwrap();
        let a = [0.1, 2.0, 5.0];
        let b = [1.0, 6.0, 0.2];
        let base = k.eval(&a, &b).unwrap();
        for i in 0..3 {
            let mut shifted = b;
            shifted[i] += TAU;
            assert!((k.eval(&a, &shifted).unwrap() - base).abs() < 1e-14);
        }
    }

    #[test]
    fn errors() {
        let k = KernelSpec::periodic(vec![1.0], 1.0).unwrap();
        assert!(matches!(
            k.eval(&[0.0, 1.0], &[0.0]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(KernelSpec::periodic(vec![0.0], 1.0).is_err());
        assert!(KernelSpec::periodic(vec![1.0], -1.0).is_err());
        let bad = KernelSpec {
            family: KernelFamily::Periodic {
                period: 0.0,
                fixed_period: true,
            },
            lengthscales: vec![1.0],
            output_scale: 1.0,
        };
        assert!(bad.eval(&[0.0], &[1.0]).is_err());
    }

    #[test]
    fn smoothness_serde() {
        let fam: KernelFamily = serde_json::from_str(r#"{"family":"matern","nu":1.5}"#).unwrap();
        assert_eq!(
            fam,
            KernelFamily::Matern {
                nu: Smoothness::ThreeHalves
            }
        );
        assert!(serde_json::from_str::<KernelFamily>(r#"{"family":"matern","nu":2.0}"#).is_err());
    }
}
