//! Syntactic privacy models checked over an equivalence-class partition:
//! k-anonymity, distinct ℓ-diversity, t-closeness (total variation) and
//! δ-disclosure.
//!
//! The "global" distribution of a sensitive attribute is taken over the
//! rows the partition covers, so suppressed rows do not count.

use std::collections::{BTreeMap, BTreeSet};

use num_rational::BigRational;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::partition::{EquivalenceClass, Partition};
use crate::scalar::{Real, Scalar};
use crate::table::{Table, Value};

/// Slack used when comparing a computed distance against `t`.
pub const DISTANCE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PrivacyModel {
    KAnonymity,
    LDiversity,
    TCloseness,
    DeltaDisclosure,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelVerdict {
    pub model: PrivacyModel,
    pub threshold: f64,
    pub satisfied: bool,
    /// Best k / ℓ reached, or worst distance / δ term observed.
    #[serde(with = "crate::serde_float")]
    pub achieved: f64,
    pub violating_classes: Vec<Vec<Value>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distance: Option<&'static str>,
}

/// Which sensitive values δ-disclosure inspects in each class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DeltaSupport {
    /// Every value present anywhere in the partition; a value missing from
    /// a class has an infinite term.
    #[default]
    Global,
    /// Only values that occur in the class itself.
    ClassOnly,
}

/// Frequencies of sensitive values, sorted by value.
#[derive(Debug, Clone, PartialEq)]
pub struct SensitiveDistribution<S> {
    pub support: Vec<Value>,
    pub frequencies: Vec<S>,
}

impl<S: Scalar> SensitiveDistribution<S> {
    /// Empirical distribution of the given values; `None` when empty.
    pub fn from_values<'a>(values: impl IntoIterator<Item = &'a Value>) -> Option<Self> {
        let counts = count_values(values);
        let total: u64 = counts.values().sum();
        if total == 0 {
            return None;
        }
        let (support, frequencies) = counts
            .into_iter()
            .map(|(v, c)| (v.clone(), S::ratio(c, total)))
            .unzip();
        Some(Self { support, frequencies })
    }

    pub fn frequency(&self, value: &Value) -> S {
        self.support
            .binary_search(value)
            .map(|i| self.frequencies[i].clone())
            .unwrap_or_else(|_| S::zero())
    }

    pub fn total(&self) -> S {
        self.frequencies.iter().cloned().fold(S::zero(), |a, b| a + b)
    }

    /// ½·Σ|self(v) − other(v)| over the union of supports.
    pub fn total_variation(&self, other: &Self) -> S {
        let support: BTreeSet<&Value> = self.support.iter().chain(&other.support).collect();
        let sum = support
            .into_iter()
            .map(|v| (self.frequency(v) - other.frequency(v)).abs())
            .fold(S::zero(), |a, b| a + b);
        sum / S::from_count(2)
    }
}

fn count_values<'a>(values: impl IntoIterator<Item = &'a Value>) -> BTreeMap<&'a Value, u64> {
    let mut counts = BTreeMap::new();
    for v in values {
        *counts.entry(v).or_insert(0u64) += 1;
    }
    counts
}

fn class_values<'a>(table: &'a Table, col: usize, class: &'a EquivalenceClass) -> impl Iterator<Item = &'a Value> {
    class.row_indices.iter().map(move |&r| table.cell(r, col))
}

fn partition_values<'a>(table: &'a Table, col: usize, partition: &'a Partition) -> impl Iterator<Item = &'a Value> {
    partition.classes.iter().flat_map(move |c| class_values(table, col, c))
}

pub fn check_k_anonymity(partition: &Partition, k: usize) -> ModelVerdict {
    let achieved = partition.classes.iter().map(EquivalenceClass::size).min().unwrap_or(0);
    let violating: Vec<Vec<Value>> = partition
        .classes
        .iter()
        .filter(|c| c.size() < k)
        .map(|c| c.qid_values.clone())
        .collect();
    ModelVerdict {
        model: PrivacyModel::KAnonymity,
        threshold: k as f64,
        satisfied: violating.is_empty(),
        achieved: achieved as f64,
        violating_classes: violating,
        distance: None,
    }
}

/// Distinct ℓ-diversity: each class needs at least `l` different sensitive values.
pub fn check_l_diversity(table: &Table, partition: &Partition, sensitive: &str, l: usize) -> Result<ModelVerdict> {
    let col = table.column_index(sensitive)?;
    let distinct: Vec<usize> = partition
        .classes
        .iter()
        .map(|c| class_values(table, col, c).collect::<BTreeSet<_>>().len())
        .collect();
    let violating: Vec<Vec<Value>> = partition
        .classes
        .iter()
        .zip(&distinct)
        .filter(|(_, &d)| d < l)
        .map(|(c, _)| c.qid_values.clone())
        .collect();
    Ok(ModelVerdict {
        model: PrivacyModel::LDiversity,
        threshold: l as f64,
        satisfied: violating.is_empty(),
        achieved: distinct.into_iter().min().unwrap_or(0) as f64,
        violating_classes: violating,
        distance: None,
    })
}

/// Total-variation distance between each class's sensitive distribution and
/// the partition-wide one, in class order.
pub fn class_distances<S: Scalar>(table: &Table, partition: &Partition, sensitive: &str) -> Result<Vec<S>> {
    let col = table.column_index(sensitive)?;
    let global = SensitiveDistribution::<S>::from_values(partition_values(table, col, partition))
        .ok_or(Error::EmptyTable)?;
    Ok(partition
        .classes
        .iter()
        .map(|c| {
            SensitiveDistribution::<S>::from_values(class_values(table, col, c))
                .expect("classes are non-empty")
                .total_variation(&global)
        })
        .collect())
}

pub fn check_t_closeness(table: &Table, partition: &Partition, sensitive: &str, t: f64) -> Result<ModelVerdict> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidParameter(format!("t must lie in [0, 1], got {t}")));
    }
    let distances: Vec<f64> = class_distances::<BigRational>(table, partition, sensitive)?
        .iter()
        .map(Scalar::to_f64_lossy)
        .collect();
    let violating: Vec<Vec<Value>> = partition
        .classes
        .iter()
        .zip(&distances)
        .filter(|(_, &d)| d > t + DISTANCE_TOLERANCE)
        .map(|(c, _)| c.qid_values.clone())
        .collect();
    Ok(ModelVerdict {
        model: PrivacyModel::TCloseness,
        threshold: t,
        satisfied: violating.is_empty(),
        achieved: distances.into_iter().fold(0.0, f64::max),
        violating_classes: violating,
        distance: Some("total_variation"),
    })
}

/// `|log_base(q / p)|`; infinite when `q` is zero.
pub fn delta_term<F: Real>(q: F, p: F, base: F) -> F {
    if q.is_zero() {
        return F::infinity();
    }
    ((q / p).ln() / base.ln()).abs()
}

/// δ-disclosure: every inspected term must be strictly below `delta`.
pub fn check_delta_disclosure(
    table: &Table,
    partition: &Partition,
    sensitive: &str,
    delta: f64,
    log_base: f64,
    support: DeltaSupport,
) -> Result<ModelVerdict> {
    if delta <= 0.0 {
        return Err(Error::InvalidParameter(format!("δ must be positive, got {delta}")));
    }
    if log_base <= 1.0 {
        return Err(Error::InvalidParameter(format!("log base must exceed 1, got {log_base}")));
    }
    let col = table.column_index(sensitive)?;
    let global = count_values(partition_values(table, col, partition));
    let total: u64 = global.values().sum();

    let mut achieved = 0.0f64;
    let mut violating = Vec::new();
    for class in &partition.classes {
        let local = count_values(class_values(table, col, class));
        let size = class.size() as u64;
        let mut worst = 0.0f64;
        for (value, &count) in &global {
            let in_class = local.get(value).copied().unwrap_or(0);
            if in_class == 0 && support == DeltaSupport::ClassOnly {
                continue;
            }
            let q = f64::ratio(in_class, size);
            let p = f64::ratio(count, total);
            worst = worst.max(delta_term(q, p, log_base));
        }
        achieved = achieved.max(worst);
        if worst >= delta {
            violating.push(class.qid_values.clone());
        }
    }
    Ok(ModelVerdict {
        model: PrivacyModel::DeltaDisclosure,
        threshold: delta,
        satisfied: violating.is_empty(),
        achieved,
        violating_classes: violating,
        distance: None,
    })
}

/// Classes whose rows all carry the same sensitive value; their members'
/// sensitive value is disclosed to anyone who can place them in the class.
pub fn homogeneous_classes<'p>(
    table: &Table,
    partition: &'p Partition,
    sensitive: &str,
) -> Result<Vec<&'p EquivalenceClass>> {
    let col = table.column_index(sensitive)?;
    Ok(partition
        .classes
        .iter()
        .filter(|c| class_values(table, col, c).collect::<BTreeSet<_>>().len() == 1)
        .collect())
}
