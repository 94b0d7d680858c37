use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// (ε, δ) of a release; `delta = 0` is pure ε-DP.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DpParameters {
    pub epsilon: f64,
    pub delta: f64,
}

impl DpParameters {
    pub fn new(epsilon: f64, delta: f64) -> Result<Self> {
        if !(epsilon >= 0.0) {
            return Err(Error::InvalidParameter(format!("ε must be ≥ 0, got {epsilon}")));
        }
        if !(0.0..1.0).contains(&delta) {
            return Err(Error::InvalidParameter(format!("δ must lie in [0, 1), got {delta}")));
        }
        Ok(Self { epsilon, delta })
    }

    pub fn pure(epsilon: f64) -> Result<Self> {
        Self::new(epsilon, 0.0)
    }

    pub fn is_pure(&self) -> bool {
        self.delta == 0.0
    }
}

/// Upper bound on the chance of guessing a sensitive value among
/// `n_values` equally plausible ones from an ε-DP observation:
/// `e^ε / (e^ε + n − 1)`.
pub fn reid_bound<F: Real>(epsilon: F, n_values: u64) -> Result<F> {
    if n_values < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 values, got {n_values}")));
    }
    if epsilon < F::zero() || epsilon.is_nan() {
        return Err(Error::InvalidParameter("ε must be non-negative".into()));
    }
    // same quantity, written to avoid overflow of e^ε
    let others = F::from_count(n_values - 1);
    Ok(F::one() / (F::one() + others * (-epsilon).exp()))
}

/// ε of running mechanisms one after another on the same data.
pub fn compose_sequential<F: Real>(epsilons: &[F]) -> F {
    epsilons.iter().fold(F::zero(), |a, &b| a + b)
}

/// ε of running mechanisms on disjoint data.
pub fn compose_parallel<F: Real>(epsilons: &[F]) -> F {
    epsilons.iter().fold(F::zero(), |a, &b| a.max(b))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LedgerMode {
    /// A fixed ε budget; spends that would exceed it are refused.
    Budgeted,
    /// No cap; the ledger only adds up what was spent.
    Accumulating,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub label: String,
    #[serde(with = "crate::serde_float")]
    pub epsilon: f64,
    #[serde(default)]
    pub delta: f64,
    pub dataset_tag: String,
}

/// Ordered record of releases.
///
/// Releases on the same dataset tag compose sequentially (ε and δ add);
/// different tags are disjoint data and compose in parallel (max).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetLedger {
    pub mode: LedgerMode,
    pub budget: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_releases: Option<usize>,
    pub entries: Vec<LedgerEntry>,
}

/// Relative slack so that k spends of `budget / k` always fit.
const BUDGET_SLACK: f64 = 1e-12;

impl BudgetLedger {
    pub fn accumulating() -> Self {
        Self {
            mode: LedgerMode::Accumulating,
            budget: None,
            max_releases: None,
            entries: Vec::new(),
        }
    }

    pub fn budgeted(budget: f64, max_releases: Option<usize>) -> Result<Self> {
        if !(budget > 0.0) || budget.is_infinite() {
            return Err(Error::InvalidParameter(format!("budget must be a positive finite ε, got {budget}")));
        }
        Ok(Self {
            mode: LedgerMode::Budgeted,
            budget: Some(budget),
            max_releases,
            entries: Vec::new(),
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let ledger: Self = serde_json::from_str(text)?;
        if ledger.mode == LedgerMode::Budgeted && ledger.budget.is_none() {
            return Err(Error::InvalidParameter("budgeted ledger without a budget".into()));
        }
        Ok(ledger)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    fn per_tag(&self, pick: impl Fn(&LedgerEntry) -> f64) -> BTreeMap<&str, f64> {
        let mut totals = BTreeMap::new();
        for e in &self.entries {
            *totals.entry(e.dataset_tag.as_str()).or_insert(0.0) += pick(e);
        }
        totals
    }

    /// Sum of ε within each dataset tag, maximised across tags.
    pub fn total_epsilon(&self) -> f64 {
        self.per_tag(|e| e.epsilon).into_values().fold(0.0, f64::max)
    }

    pub fn total_delta(&self) -> f64 {
        self.per_tag(|e| e.delta).into_values().fold(0.0, f64::max)
    }

    pub fn spent_on(&self, tag: &str) -> f64 {
        self.entries
            .iter()
            .filter(|e| e.dataset_tag == tag)
            .map(|e| e.epsilon)
            .sum()
    }

    /// Budget left for further spends on the most-used dataset.
    pub fn remaining(&self) -> Option<f64> {
        self.budget.map(|b| b - self.total_epsilon())
    }

    /// Records a release, or refuses it without changing the ledger.
    pub fn spend(&mut self, label: impl Into<String>, params: DpParameters, dataset_tag: impl Into<String>) -> Result<()> {
        let dataset_tag = dataset_tag.into();
        if self.mode == LedgerMode::Budgeted {
            if let Some(limit) = self.max_releases {
                if self.entries.len() >= limit {
                    return Err(Error::ReleaseLimit { limit });
                }
            }
            let budget = self.budget.expect("budgeted ledger has a budget");
            let after = self.spent_on(&dataset_tag) + params.epsilon;
            if after > budget * (1.0 + BUDGET_SLACK) {
                return Err(Error::BudgetExceeded {
                    requested: params.epsilon,
                    remaining: budget - self.spent_on(&dataset_tag),
                });
            }
        }
        self.entries.push(LedgerEntry {
            label: label.into(),
            epsilon: params.epsilon,
            delta: params.delta,
            dataset_tag,
        });
        Ok(())
    }
}

/// Splits `budget` evenly over `k` releases and returns the per-release ε
/// with a budgeted ledger capped at `k` releases.
pub fn ledger_allocate(budget: f64, k: usize) -> Result<(f64, BudgetLedger)> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be ≥ 1".into()));
    }
    let ledger = BudgetLedger::budgeted(budget, Some(k))?;
    Ok((budget / k as f64, ledger))
}
