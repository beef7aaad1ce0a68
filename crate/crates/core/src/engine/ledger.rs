//! Shot budget accounting.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Random high-shot initialization, then LCB on a GP of all observations.
    Vanilla,
    /// Low-shot initialization frozen into a prior mean, then LCB on a
    /// residual GP.
    Lsr,
}

/// Tracks spent shots against the total budget `B`.
///
/// A query is issued only when it is affordable, so `spent ≤ total` holds
/// at every step.
#[derive(Debug, Clone, PartialEq)]
pub struct BudgetLedger {
    method: Method,
    total: u64,
    spent: u64,
    shots_high: u64,
    shots_low: u64,
    gamma: f64,
}

/// `⌊γB / s⌋`, robust to the representation error of `γ`.
fn init_queries(gamma: f64, total: u64, shots: u64) -> u64 {
    let exact = gamma * total as f64 / shots as f64;
    let m = (exact * (1.0 + 1e-12) + 1e-12).floor() as u64;
    m.min(total / shots)
}

impl BudgetLedger {
    pub fn vanilla(total: u64, shots_high: u64, gamma: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::InvalidBudget(format!("gamma {gamma} outside [0, 1]")));
        }
        Self::checked(Method::Vanilla, total, shots_high, shots_high, gamma)
    }

    pub fn lsr(total: u64, shots_high: u64, shots_low: u64, gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::InvalidBudget(format!("gamma {gamma} outside (0, 1)")));
        }
        let ledger = Self::checked(Method::Lsr, total, shots_high, shots_low, gamma)?;
        if ledger.init_count() == 0 {
            return Err(Error::InvalidBudget(format!(
                "gamma·B = {} buys no low-shot query at {shots_low} shots",
                gamma * total as f64
            )));
        }
        Ok(ledger)
    }

    fn checked(method: Method, total: u64, shots_high: u64, shots_low: u64, gamma: f64) -> Result<Self> {
        if shots_low == 0 {
            return Err(Error::InvalidBudget("low-shot count must be at least 1".into()));
        }
        if shots_low > shots_high {
            return Err(Error::InvalidBudget(format!(
                "low-shot count {shots_low} exceeds high-shot count {shots_high}"
            )));
        }
        if total < shots_high {
            return Err(Error::InvalidBudget(format!(
                "budget {total} is smaller than one {shots_high}-shot query"
            )));
        }
        Ok(BudgetLedger {
            method,
            total,
            spent: 0,
            shots_high,
            shots_low,
            gamma,
        })
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn spent(&self) -> u64 {
        self.spent
    }

    pub fn remaining(&self) -> u64 {
        self.total - self.spent
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn shots_high(&self) -> u64 {
        self.shots_high
    }

    pub fn shots_low(&self) -> u64 {
        self.shots_low
    }

    /// `r = s_low / s̄`.
    pub fn ratio(&self) -> f64 {
        self.shots_low as f64 / self.shots_high as f64
    }

    /// Shots per initialization query.
    pub fn init_shots(&self) -> u64 {
        match self.method {
            Method::Vanilla => self.shots_high,
            Method::Lsr => self.shots_low,
        }
    }

    /// Number of initialization queries `m`.
    pub fn init_count(&self) -> u64 {
        init_queries(self.gamma, self.total, self.init_shots())
    }

    /// `(m, n_bo)`: initialization queries and the high-shot BO queries the
    /// remaining budget affords.
    pub fn planned_counts(&self) -> (u64, u64) {
        let m = self.init_count();
        let rest = self.total - m * self.init_shots();
        (m, rest / self.shots_high)
    }

    pub fn can_afford(&self, cost: u64) -> bool {
        self.spent + cost <= self.total
    }

    pub fn spend(&mut self, cost: u64) -> Result<()> {
        if !self.can_afford(cost) {
            return Err(Error::InvalidBudget(format!(
                "query of {cost} shots exceeds remaining budget {}",
                self.remaining()
            )));
        }
        self.spent += cost;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vanilla_counts() {
        let l = BudgetLedger::vanilla(100 * 10_000, 10_000, 0.1).unwrap();
        assert_eq!(l.planned_counts(), (10, 90));
        let l = BudgetLedger::vanilla(100 * 10_000, 10_000, 1.0).unwrap();
        assert_eq!(l.planned_counts(), (100, 0));
    }

    #[test]
    fn lsr_counts() {
        let l = BudgetLedger::lsr(100 * 10_000, 10_000, 100, 0.1).unwrap();
        assert_eq!(l.planned_counts(), (1000, 90));
        assert!((l.ratio() - 0.01).abs() < 1e-15);
    }

    #[test]
    fn invalid() {
        assert!(BudgetLedger::vanilla(10, 100, 0.5).is_err());
        assert!(BudgetLedger::vanilla(1000, 100, 1.5).is_err());
        assert!(BudgetLedger::lsr(1000, 100, 200, 0.5).is_err());
        assert!(BudgetLedger::lsr(1000, 100, 0, 0.5).is_err());
        assert!(BudgetLedger::lsr(1000, 100, 50, 1.0).is_err());
        // γB = 40 < s_low = 50
        assert!(BudgetLedger::lsr(1000, 100, 50, 0.04).is_err());
    }

    #[test]
    fn spend_never_exceeds() {
        let mut l = BudgetLedger::vanilla(250, 100, 0.0).unwrap();
        assert!(l.spend(100).is_ok());
        assert!(l.spend(100).is_ok());
        assert!(!l.can_afford(100));
        assert!(l.spend(100).is_err());
        assert_eq!(l.spent(), 200);
    }

    #[test]
    fn floor_is_robust_to_decimal_gamma() {
        // 0.29 · 100 evaluates to 28.999999999999996 in floating point
        let l = BudgetLedger::vanilla(100, 1, 0.29).unwrap();
        assert_eq!(l.init_count(), 29);
    }
}
