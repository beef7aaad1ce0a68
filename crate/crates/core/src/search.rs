//! Coordinate pattern search on the periodic box.

use crate::param::wrap_angle;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatternSearch {
    pub initial_step: f64,
    pub shrink: f64,
    pub iterations: usize,
    /// Stops early once the step falls below this.
    pub min_step: f64,
}

impl Default for PatternSearch {
    fn default() -> Self {
        PatternSearch {
            initial_step: std::f64::consts::PI / 8.0,
            shrink: 0.5,
            iterations: 40,
            min_step: 1e-4,
        }
    }
}

impl PatternSearch {
    /// Minimizes `f` starting from `(x, fx)`. Each iteration polls `±step`
    /// along every coordinate (wrapping into `[0, 2π)`), keeping strict
    /// improvements; a sweep without improvement shrinks the step.
    pub fn minimize<F>(&self, f: &mut F, mut x: Vec<f64>, mut fx: f64) -> (Vec<f64>, f64)
    where
        F: FnMut(&[f64]) -> f64,
    {
        let mut step = self.initial_step;
        let mut trial = x.clone();
        for _ in 0..self.iterations {
            if step < self.min_step {
                break;
            }
            let mut improved = false;
            for i in 0..x.len() {
                for dir in [1.0, -1.0] {
                    trial.copy_from_slice(&x);
                    trial[i] = wrap_angle(x[i] + dir * step);
                    let ft = f(&trial);
                    if ft < fx {
                        fx = ft;
                        x.copy_from_slice(&trial);
                        improved = true;
                        break;
                    }
                }
            }
            if !improved {
                step *= self.shrink;
            }
        }
        (x, fx)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    #[test]
    fn converges_across_the_seam() {
        // minimum at 0 ≡ 2π, start on the far side
        let mut f = |x: &[f64]| -x[0].cos();
        let (x, fx) = PatternSearch::default().minimize(&mut f, vec![5.5], -(5.5f64).cos());
        assert!(fx < -0.9999);
        assert!(x[0] < 0.01 || x[0] > TAU - 0.01);
        assert!((0.0..TAU).contains(&x[0]));
    }
}
