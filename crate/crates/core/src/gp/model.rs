//! Exact GP posterior with a cached Cholesky factorization.

use nalgebra::DMatrix;

use std::f64::consts::TAU;

use super::kernel::{KernelFamily, KernelSpec};
use crate::error::{Error, Result};
use crate::param::ParamVector;

const JITTER_START: f64 = 1e-8;
const JITTER_MAX: f64 = 1e-2;

/// Cholesky factor of `a + jitter·I`, escalating the jitter (relative to
/// `scale`) until the factorization succeeds. Returns the lower factor and
/// the absolute jitter used (0 when none was needed).
pub(crate) fn factorize(a: DMatrix<f64>, scale: f64) -> Result<(DMatrix<f64>, f64)> {
    if let Some(chol) = a.clone().cholesky() {
        return Ok((chol.unpack(), 0.0));
    }
    let mut rel = JITTER_START;
    loop {
        let jitter = rel * scale;
        let mut shifted = a.clone();
        for i in 0..shifted.nrows() {
            shifted[(i, i)] += jitter;
        }
        if let Some(chol) = shifted.cholesky() {
            return Ok((chol.unpack(), jitter));
        }
        if rel >= JITTER_MAX * (1.0 - 1e-12) {
            return Err(Error::NotPositiveDefinite { jitter });
        }
        rel *= 10.0;
    }
}

/// Solves `L v = b` in place for lower-triangular `l`.
#[inline]
pub(crate) fn forward_substitute(l: &DMatrix<f64>, b: &mut [f64]) {
    let n = b.len();
    for i in 0..n {
        let mut s = b[i];
        for j in 0..i {
            s -= l[(i, j)] * b[j];
        }
        b[i] = s / l[(i, i)];
    }
}

/// A Gaussian process conditioned on noisy observations.
///
/// Immutable after construction, so a shared model can serve concurrent
/// posterior queries.
#[derive(Debug, Clone)]
pub struct GpModel {
    kernel: KernelSpec,
    prior_mean: f64,
    noise_variance: f64,
    dim: usize,
    /// Row-major `n × d` training inputs.
    inputs: Vec<f64>,
    targets: Vec<f64>,
    /// Lower Cholesky factor of `K + σ² I + jitter I`.
    chol: DMatrix<f64>,
    /// `(K + σ² I)⁻¹ (y - m)`.
    alpha: Vec<f64>,
    jitter: f64,
    /// Periodic kernels only: `(cos ωx, sin ωx)` per training coordinate with
    /// `ω = 2π / p`, so cross-covariances need no per-pair trigonometry.
    trig: Option<Vec<f64>>,
}

fn trig_features(theta: &[f64], omega: f64, out: &mut Vec<f64>) {
    for &t in theta {
        let (s, c) = (omega * t).sin_cos();
        out.push(c);
        out.push(s);
    }
}

impl GpModel {
    pub fn new(
        kernel: KernelSpec,
        prior_mean: f64,
        noise_variance: f64,
        inputs: &[ParamVector],
        targets: &[f64],
    ) -> Result<Self> {
        kernel.validate()?;
        if !(noise_variance >= 0.0 && noise_variance.is_finite()) {
            return Err(Error::InvalidHyperparameter {
                name: "noise_variance",
                value: noise_variance,
            });
        }
        if inputs.len() != targets.len() {
            return Err(Error::DimensionMismatch {
                expected: inputs.len(),
                got: targets.len(),
            });
        }
        let dim = kernel.dim();
        let mut flat = Vec::with_capacity(inputs.len() * dim);
        for x in inputs {
            if x.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: x.dim(),
                });
            }
            flat.extend_from_slice(x.as_slice());
        }
        let n = inputs.len();
        let mut k = DMatrix::zeros(n, n);
        for i in 0..n {
            let xi = &flat[i * dim..(i + 1) * dim];
            for j in 0..i {
                let v = kernel.eval_unchecked(xi, &flat[j * dim..(j + 1) * dim]);
                k[(i, j)] = v;
                k[(j, i)] = v;
            }
            k[(i, i)] = kernel.output_scale + noise_variance;
        }
        let (chol, jitter) = factorize(k, kernel.output_scale)?;
        let mut alpha: Vec<f64> = targets.iter().map(|y| y - prior_mean).collect();
        forward_substitute(&chol, &mut alpha);
        backward_substitute_transposed(&chol, &mut alpha);
        let trig = match kernel.family {
            KernelFamily::Periodic { period, .. } => {
                let mut t = Vec::with_capacity(2 * flat.len());
                trig_features(&flat, TAU / period, &mut t);
                Some(t)
            }
            KernelFamily::Matern { .. } => None,
        };
        Ok(GpModel {
            kernel,
            prior_mean,
            noise_variance,
            dim,
            inputs: flat,
            targets: targets.to_vec(),
            chol,
            alpha,
            jitter,
            trig,
        })
    }

    /// The unconditioned prior (`n = 0`).
    pub fn prior(kernel: KernelSpec, prior_mean: f64, noise_variance: f64) -> Result<Self> {
        Self::new(kernel, prior_mean, noise_variance, &[], &[])
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn prior_mean(&self) -> f64 {
        self.prior_mean
    }

    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }

    /// Absolute diagonal jitter the factorization needed (usually 0).
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn inputs(&self) -> Vec<ParamVector> {
        self.inputs
            .chunks(self.dim)
            .map(|c| ParamVector::new(c.to_vec()))
            .collect()
    }

    /// Calls `f(i, k(θ, x_i))` for every training input.
    #[inline]
    fn for_each_cross(&self, theta: &[f64], mut f: impl FnMut(usize, f64)) {
        match &self.trig {
            Some(trig) => {
                // sin²(πΔ/p) = (1 - cos ωa cos ωb - sin ωa sin ωb) / 2
                let KernelFamily::Periodic { period, .. } = self.kernel.family else {
                    unreachable!("trig features exist only for periodic kernels")
                };
                let mut q = Vec::with_capacity(2 * self.dim);
                trig_features(theta, TAU / period, &mut q);
                let weights = self.kernel.component_weights();
                for (i, row) in trig.chunks_exact(2 * self.dim).enumerate() {
                    let mut reduced = 0.0;
                    for ((x, y), w) in row.chunks_exact(2).zip(q.chunks_exact(2)).zip(&weights) {
                        reduced += w * (1.0 - x[0] * y[0] - x[1] * y[1]);
                    }
                    f(i, self.kernel.output_scale * (-reduced).exp());
                }
            }
            None => {
                for (i, x) in self.inputs.chunks_exact(self.dim).enumerate() {
                    f(i, self.kernel.eval_unchecked(theta, x));
                }
            }
        }
    }

    fn cross_covariance(&self, theta: &[f64]) -> Vec<f64> {
        let mut k = vec![0.0; self.len()];
        self.for_each_cross(theta, |i, v| k[i] = v);
        k
    }

    /// Posterior mean only; skips the triangular solve.
    pub fn mean_at(&self, theta: &[f64]) -> f64 {
        debug_assert_eq!(theta.len(), self.dim);
        let mut m = self.prior_mean;
        self.for_each_cross(theta, |i, v| m += v * self.alpha[i]);
        m
    }

    /// Posterior `(mean, variance)` at one point; the variance is clamped at 0.
    pub fn predict(&self, theta: &[f64]) -> (f64, f64) {
        debug_assert_eq!(theta.len(), self.dim);
        let mut k = self.cross_covariance(theta);
        let mean = self.prior_mean + k.iter().zip(&self.alpha).map(|(a, b)| a * b).sum::<f64>();
        forward_substitute(&self.chol, &mut k);
        let explained: f64 = k.iter().map(|v| v * v).sum();
        let var = self.kernel.output_scale - explained;
        (mean, var.max(0.0))
    }

    /// Posterior means and variances at `queries`.
    pub fn posterior(&self, queries: &[ParamVector]) -> Result<(Vec<f64>, Vec<f64>)> {
        let mut means = Vec::with_capacity(queries.len());
        let mut vars = Vec::with_capacity(queries.len());
        for q in queries {
            if q.dim() != self.dim {
                return Err(Error::DimensionMismatch {
                    expected: self.dim,
                    got: q.dim(),
                });
            }
            let (m, v) = self.predict(q.as_slice());
            means.push(m);
            vars.push(v);
        }
        Ok((means, vars))
    }

    /// `log p(y | θ, hyperparameters)`.
    pub fn log_marginal_likelihood(&self) -> f64 {
        let n = self.targets.len() as f64;
        let fit: f64 = self
            .targets
            .iter()
            .zip(&self.alpha)
            .map(|(y, a)| (y - self.prior_mean) * a)
            .sum();
        let log_det: f64 = self.chol.diagonal().iter().map(|d| d.ln()).sum();
        -0.5 * fit - log_det - 0.5 * n * (2.0 * std::f64::consts::PI).ln()
    }

    /// The full `K + σ² I` training covariance (without jitter).
    pub fn training_covariance(&self) -> DMatrix<f64> {
        let n = self.len();
        DMatrix::from_fn(n, n, |i, j| {
            let v = self.kernel.eval_unchecked(
                &self.inputs[i * self.dim..(i + 1) * self.dim],
                &self.inputs[j * self.dim..(j + 1) * self.dim],
            );
            if i == j {
                v + self.noise_variance
            } else {
                v
            }
        })
    }
}

/// Solves `Lᵀ x = b` in place.
#[inline]
pub(crate) fn backward_substitute_transposed(l: &DMatrix<f64>, b: &mut [f64]) {
    let n = b.len();
    for i in (0..n).rev() {
        let mut s = b[i];
        for j in i + 1..n {
            s -= l[(j, i)] * b[j];
        }
        b[i] = s / l[(i, i)];
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gp::Smoothness;

    fn pts(v: &[f64]) -> Vec<ParamVector> {
        v.iter().map(|&x| ParamVector::new(vec![x])).collect()
    }

    #[test]
    fn empty_model_is_prior() {
        let k = KernelSpec::periodic(vec![1.0, 1.0], 2.5).unwrap();
        let gp = GpModel::prior(k, 0.0, 0.1).unwrap();
        let (m, v) = gp.predict(&[1.0, 2.0]);
        assert_eq!(m, 0.0);
        assert_eq!(v, 2.5);
    }

    #[test]
    fn noiseless_interpolation() {
        let k = KernelSpec::matern(Smoothness::FiveHalves, vec![1.0], 1.0).unwrap();
        let x = pts(&[0.5, 2.0, 4.0]);
        let y = [1.0, -0.3, 0.7];
        let gp = GpModel::new(k, 0.0, 0.0, &x, &y).unwrap();
        for (xi, yi) in x.iter().zip(y) {
            let (m, v) = gp.predict(xi.as_slice());
            assert!((m - yi).abs() < 1e-8, "{m} vs {yi}");
            assert!(v <= 1e-8);
        }
    }

    #[test]
    fn duplicate_noiseless_inputs_need_jitter() {
        let k = KernelSpec::matern(Smoothness::FiveHalves, vec![1.0], 1.0).unwrap();
        let x = pts(&[1.0, 1.0]);
        let gp = GpModel::new(k, 0.0, 0.0, &x, &[0.5, 0.5]).unwrap();
        assert!(gp.jitter() > 0.0);
        let (m, _) = gp.predict(&[1.0]);
        assert!((m - 0.5).abs() < 1e-6);
    }

    #[test]
    fn dimension_errors() {
        let k = KernelSpec::periodic(vec![1.0], 1.0).unwrap();
        let bad = vec![ParamVector::new(vec![0.0, 1.0])];
        assert!(GpModel::new(k.clone(), 0.0, 0.1, &bad, &[1.0]).is_err());
        assert!(GpModel::new(k.clone(), 0.0, 0.1, &pts(&[0.0]), &[1.0, 2.0]).is_err());
        let gp = GpModel::new(k, 0.0, 0.1, &pts(&[0.0]), &[1.0]).unwrap();
        assert!(gp.posterior(&bad).is_err());
    }

    #[test]
    fn negative_noise_rejected() {
        let k = KernelSpec::periodic(vec![1.0], 1.0).unwrap();
        assert!(GpModel::prior(k, 0.0, -1.0).is_err());
    }
}
