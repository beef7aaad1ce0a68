//! Points in the periodic parameter box `[0, 2π)^d`.

use std::f64::consts::TAU;
use std::ops::Index;

use rand::Rng;
use serde::{Deserialize, Serialize};

/// Wraps an angle into `[0, 2π)`.
pub fn wrap_angle(x: f64) -> f64 {
    let w = x.rem_euclid(TAU);
    // rem_euclid can return TAU itself for tiny negative inputs
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// A vector of rotation angles in radians, one per circuit parameter.
///
/// Raw values may be any real; [`ParamVector::wrapped`] gives the canonical
/// representative in `[0, 2π)^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParamVector(Vec<f64>);

impl ParamVector {
    pub fn new(values: Vec<f64>) -> Self {
        ParamVector(values)
    }

    pub fn zeros(dim: usize) -> Self {
        ParamVector(vec![0.0; dim])
    }

    /// Uniform draw over `[0, 2π)^dim`.
    pub fn uniform<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        ParamVector((0..dim).map(|_| rng.random::<f64>() * TAU).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn wrapped(&self) -> Self {
        ParamVector(self.0.iter().map(|&x| wrap_angle(x)).collect())
    }

    /// True when every coordinate already lies in `[0, 2π)`.
    pub fn is_canonical(&self) -> bool {
        self.0.iter().all(|&x| (0.0..TAU).contains(&x))
    }

    /// Copy with coordinate `i` shifted by `delta` (no wrapping).
    pub fn shifted(&self, i: usize, delta: f64) -> Self {
        let mut v = self.0.clone();
        v[i] += delta;
        ParamVector(v)
    }
}

impl Index<usize> for ParamVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl From<Vec<f64>> for ParamVector {
    fn from(v: Vec<f64>) -> Self {
        ParamVector(v)
    }
}
