//! Utility of aggregate queries on published data.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hierarchy::GeneralizationHierarchy;
use crate::scalar::Real;
use crate::table::{Table, Value};

/// One row of a grouped aggregate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateResult<F> {
    pub group_key: Value,
    pub aggregate_value: F,
}

/// Mean of `measure` per distinct value of `group_by`, sorted by key.
pub fn run_group_mean<F: Real>(table: &Table, group_by: &str, measure: &str) -> Result<Vec<AggregateResult<F>>> {
    let key_col = table.column_index(group_by)?;
    let measure_col = table.column_index(measure)?;
    let mut groups: BTreeMap<&Value, (F, u64)> = BTreeMap::new();
    for (r, row) in table.rows().iter().enumerate() {
        let x = row[measure_col].as_number().ok_or_else(|| Error::NonNumeric {
            attribute: measure.to_string(),
            row: r,
        })?;
        let x = F::from_f64(x).expect("finite cell");
        let entry = groups.entry(&row[key_col]).or_insert((F::zero(), 0));
        entry.0 = entry.0 + x;
        entry.1 += 1;
    }
    Ok(groups
        .into_iter()
        .map(|(key, (sum, n))| AggregateResult {
            group_key: key.clone(),
            aggregate_value: sum / F::from_count(n),
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupError<F> {
    pub original_key: Value,
    pub original_value: F,
    pub anonymized_key: Value,
    pub anonymized_value: F,
    /// `|anonymized − original| / original`
    pub error: F,
}

/// Pairs each original group with the anonymized group whose key is its
/// generalization under `hierarchy`, and computes the normalized error.
pub fn normalized_errors<F: Real>(
    original: &[AggregateResult<F>],
    anonymized: &[AggregateResult<F>],
    hierarchy: &GeneralizationHierarchy,
) -> Result<Vec<GroupError<F>>> {
    original
        .iter()
        .map(|orig| {
            let key = || orig.group_key.to_string();
            let mut matches = anonymized
                .iter()
                .filter(|a| hierarchy.generalizes_to(&orig.group_key, &a.group_key));
            let anon = matches.next().ok_or_else(|| Error::UnmatchedGroup { key: key() })?;
            if matches.next().is_some() {
                return Err(Error::AmbiguousGroup { key: key() });
            }
            if orig.aggregate_value.is_zero() {
                return Err(Error::ZeroNormalization { key: key() });
            }
            Ok(GroupError {
                original_key: orig.group_key.clone(),
                original_value: orig.aggregate_value,
                anonymized_key: anon.group_key.clone(),
                anonymized_value: anon.aggregate_value,
                error: ((anon.aggregate_value - orig.aggregate_value) / orig.aggregate_value).abs(),
            })
        })
        .collect()
}

/// Mean normalized error over the original groups.
pub fn mean_normalized_error<F: Real>(
    original: &[AggregateResult<F>],
    anonymized: &[AggregateResult<F>],
    hierarchy: &GeneralizationHierarchy,
) -> Result<F> {
    if original.is_empty() {
        return Err(Error::InvalidParameter("no original groups to compare".into()));
    }
    let errors = normalized_errors(original, anonymized, hierarchy)?;
    let sum = errors.iter().fold(F::zero(), |acc, e| acc + e.error);
    Ok(sum / F::from_count(errors.len() as u64))
}
