//! Journalist, prosecutor and marketer reidentification risk.
//!
//! All three are functions of the equivalence-class sizes alone. An
//! attacker who knows a record's QID values can do no better than a
//! uniform guess inside its class, so the per-record success chance is
//! `1 / |class|`.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::partition::Partition;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProsecutorRisk<S> {
    pub per_record: BTreeMap<usize, S>,
    pub max: S,
}

/// Per-record risk `1/|class|` and its maximum.
pub fn prosecutor_risk<S: Scalar>(partition: &Partition) -> Result<ProsecutorRisk<S>> {
    let smallest = partition
        .classes
        .iter()
        .map(|c| c.size())
        .min()
        .ok_or(Error::EmptyPartition)?;
    let per_record = partition
        .classes
        .iter()
        .flat_map(|c| {
            let risk = S::ratio(1, c.size() as u64);
            c.row_indices.iter().map(move |&r| (r, risk.clone()))
        })
        .collect();
    Ok(ProsecutorRisk {
        per_record,
        max: S::ratio(1, smallest as u64),
    })
}

/// Chance that at least one of the per-class guesses hits:
/// `1 − Π (1 − 1/|c|)`.
pub fn journalist_risk<S: Scalar>(partition: &Partition) -> Result<S> {
    if partition.is_empty() {
        return Err(Error::EmptyPartition);
    }
    let all_miss = partition.classes.iter().fold(S::one(), |acc, c| {
        let n = c.size() as u64;
        acc * S::ratio(n - 1, n)
    });
    Ok(S::one() - all_miss)
}

/// Expected fraction of records matched: `#classes / #records`.
pub fn marketer_risk<S: Scalar>(partition: &Partition) -> Result<S> {
    if partition.is_empty() {
        return Err(Error::EmptyPartition);
    }
    Ok(S::ratio(partition.classes.len() as u64, partition.row_count() as u64))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RiskReport<S> {
    pub prosecutor_per_record: BTreeMap<usize, S>,
    pub prosecutor_max: S,
    pub journalist: S,
    pub marketer: S,
    /// class size → number of classes of that size
    pub class_size_histogram: BTreeMap<usize, usize>,
}

impl<S: Scalar> RiskReport<S> {
    pub fn assess(partition: &Partition) -> Result<Self> {
        let prosecutor = prosecutor_risk::<S>(partition)?;
        let mut histogram = BTreeMap::new();
        for c in &partition.classes {
            *histogram.entry(c.size()).or_insert(0) += 1;
        }
        Ok(Self {
            prosecutor_per_record: prosecutor.per_record,
            prosecutor_max: prosecutor.max,
            journalist: journalist_risk(partition)?,
            marketer: marketer_risk(partition)?,
            class_size_histogram: histogram,
        })
    }

    pub fn to_f64(&self) -> RiskReport<f64> {
        RiskReport {
            prosecutor_per_record: self
                .prosecutor_per_record
                .iter()
                .map(|(&r, p)| (r, p.to_f64_lossy()))
                .collect(),
            prosecutor_max: self.prosecutor_max.to_f64_lossy(),
            journalist: self.journalist.to_f64_lossy(),
            marketer: self.marketer.to_f64_lossy(),
            class_size_histogram: self.class_size_histogram.clone(),
        }
    }
}
