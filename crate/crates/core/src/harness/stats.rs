//! Order statistics and the Mann–Whitney rank-sum test.

use statrs::distribution::{ContinuousCDF, Normal};

/// Linear-interpolation quantile of unsorted data (the usual "type 7"
/// definition). Returns `None` for empty input or `q` outside `[0, 1]`.
pub fn quantile(data: &[f64], q: f64) -> Option<f64> {
    if data.is_empty() || !(0.0..=1.0).contains(&q) {
        return None;
    }
    let mut sorted = data.to_vec();
    sorted.sort_by(f64::total_cmp);
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    Some(sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo]))
}

pub fn median(data: &[f64]) -> Option<f64> {
    quantile(data, 0.5)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankSum {
    /// `U` statistic of the first sample.
    pub u: f64,
    /// Two-sided p-value.
    pub p_value: f64,
}

/// Two-sided Mann–Whitney U test.
///
/// Uses midranks for ties and the normal approximation with tie-corrected
/// variance and a continuity correction. Returns `None` if either sample is
/// empty.
pub fn mann_whitney(a: &[f64], b: &[f64]) -> Option<RankSum> {
    if a.is_empty() || b.is_empty() {
        return None;
    }
    let (n1, n2) = (a.len() as f64, b.len() as f64);
    let mut pooled: Vec<(f64, bool)> = a
        .iter()
        .map(|&v| (v, true))
        .chain(b.iter().map(|&v| (v, false)))
        .collect();
    pooled.sort_by(|x, y| x.0.total_cmp(&y.0));

    let n = pooled.len();
    let mut rank_sum_a = 0.0;
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && pooled[j].0 == pooled[i].0 {
            j += 1;
        }
        // ranks i+1 ..= j share their average
        let midrank = (i + j + 1) as f64 / 2.0;
        let t = (j - i) as f64;
        tie_term += t * t * t - t;
        rank_sum_a += midrank * pooled[i..j].iter().filter(|p| p.1).count() as f64;
        i = j;
    }
    let u = rank_sum_a - n1 * (n1 + 1.0) / 2.0;

    let total = n as f64;
    let mean = n1 * n2 / 2.0;
    let var = n1 * n2 / 12.0 * ((total + 1.0) - tie_term / (total * (total - 1.0)));
    if var <= 0.0 {
        return Some(RankSum { u, p_value: 1.0 });
    }
    let z = ((u - mean).abs() - 0.5).max(0.0) / var.sqrt();
    let normal = Normal::standard();
    let p_value = (2.0 * normal.sf(z)).min(1.0);
    Some(RankSum { u, p_value })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantiles_interpolate() {
        let d = [4.0, 1.0, 3.0, 2.0];
        assert_eq!(median(&d), Some(2.5));
        assert_eq!(quantile(&d, 0.25), Some(1.75));
        assert_eq!(quantile(&d, 1.0), Some(4.0));
        assert_eq!(quantile(&[], 0.5), None);
        assert_eq!(quantile(&d, 1.5), None);
    }

    #[test]
    fn separated_samples() {
        let r = mann_whitney(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]).unwrap();
        assert_eq!(r.u, 0.0);
        // z = (4.5 - 0.5) / sqrt(5.25)
        let z: f64 = 4.0 / 5.25f64.sqrt();
        let expected = 2.0 * Normal::standard().sf(z);
        assert!((r.p_value - expected).abs() < 1e-12);
        assert!(r.p_value < 0.1);
    }

    #[test]
    fn identical_samples() {
        let a = [0.3, 0.1, 0.2, 0.5, 0.4];
        let r = mann_whitney(&a, &a).unwrap();
        assert_eq!(r.u, 12.5);
        assert_eq!(r.p_value, 1.0);
        let c = [1.0; 6];
        assert_eq!(mann_whitney(&c, &c).unwrap().p_value, 1.0);
    }
}
