//! Simple-regret curves and their aggregation across replications.

use serde::Serialize;

use super::stats::quantile;
use crate::engine::RunRecord;
use crate::error::{Error, Result};

/// Regret of the observed incumbent after every query of one run.
///
/// Entries are `None` while no query is incumbent-eligible (the low-shot
/// phase of a residual run). Values are not clamped: a noisy incumbent may
/// sit below `J*`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegretCurve {
    /// Cumulative shots `B_k` after each query.
    pub shots: Vec<u64>,
    pub regret: Vec<Option<f64>>,
}

/// Regret trace `incumbent_y − J*` of `record`.
pub fn compute_regret(record: &RunRecord, j_star: Option<f64>) -> Result<RegretCurve> {
    let j_star = j_star
        .filter(|j| j.is_finite())
        .ok_or_else(|| Error::InvalidConfig("regret needs a finite reference minimum J*".into()))?;
    Ok(RegretCurve {
        shots: record.queries.iter().map(|q| q.budget_spent).collect(),
        regret: record
            .queries
            .iter()
            .map(|q| q.incumbent_y.map(|y| y - j_star))
            .collect(),
    })
}

impl RegretCurve {
    pub fn len(&self) -> usize {
        self.shots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shots.is_empty()
    }

    /// Regret after the last query that finished within `shots`.
    pub fn at(&self, shots: u64) -> Option<f64> {
        let idx = self.shots.partition_point(|&s| s <= shots);
        idx.checked_sub(1).and_then(|i| self.regret[i])
    }

    /// Regret after the final query.
    pub fn last(&self) -> Option<f64> {
        self.regret.last().copied().flatten()
    }
}

/// Common cumulative-shot axis: every multiple of `shots_high` up to
/// `budget`, plus `budget` itself.
pub fn checkpoints(shots_high: u64, budget: u64) -> Vec<u64> {
    let mut axis: Vec<u64> = (1..=budget / shots_high).map(|j| j * shots_high).collect();
    if axis.last() != Some(&budget) {
        axis.push(budget);
    }
    axis
}

/// Per-replication regret at each checkpoint: `values[c][rep]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationTable {
    pub shots: Vec<u64>,
    pub values: Vec<Vec<Option<f64>>>,
}

impl ReplicationTable {
    pub fn new(curves: &[RegretCurve], axis: &[u64]) -> Self {
        ReplicationTable {
            shots: axis.to_vec(),
            values: axis
                .iter()
                .map(|&s| curves.iter().map(|c| c.at(s)).collect())
                .collect(),
        }
    }

    /// Rows in which every replication has an incumbent.
    pub fn complete_rows(&self) -> impl Iterator<Item = (u64, Vec<f64>)> + '_ {
        self.shots.iter().zip(&self.values).filter_map(|(&s, row)| {
            row.iter()
                .copied()
                .collect::<Option<Vec<f64>>>()
                .map(|v| (s, v))
        })
    }

    pub fn aggregate(&self) -> AggregateCurve {
        let mut out = AggregateCurve::default();
        for (s, row) in self.complete_rows() {
            out.shots.push(s);
            out.median.push(quantile(&row, 0.5).expect("nonempty row"));
            out.q25.push(quantile(&row, 0.25).expect("nonempty row"));
            out.q75.push(quantile(&row, 0.75).expect("nonempty row"));
        }
        out
    }
}

/// Median regret and interquartile band across replications.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct AggregateCurve {
    pub shots: Vec<u64>,
    pub median: Vec<f64>,
    pub q25: Vec<f64>,
    pub q75: Vec<f64>,
}

impl AggregateCurve {
    pub fn final_median(&self) -> Option<f64> {
        self.median.last().copied()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis() {
        assert_eq!(checkpoints(10, 30), vec![10, 20, 30]);
        assert_eq!(checkpoints(10, 35), vec![10, 20, 30, 35]);
    }

    #[test]
    fn lookup() {
        let c = RegretCurve {
            shots: vec![5, 10, 20],
            regret: vec![None, Some(2.0), Some(1.0)],
        };
        assert_eq!(c.at(4), None);
        assert_eq!(c.at(5), None);
        assert_eq!(c.at(15), Some(2.0));
        assert_eq!(c.at(100), Some(1.0));
        let t = ReplicationTable::new(&[c.clone(), c], &[5, 10, 20]);
        let agg = t.aggregate();
        assert_eq!(agg.shots, vec![10, 20]);
        assert_eq!(agg.median, vec![2.0, 1.0]);
    }
}
