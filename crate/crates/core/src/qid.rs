//! Quasi-identifier detection.
//!
//! An attribute set is a QID of a table instance when grouping by it
//! leaves at least one singleton class. Adding attributes can only split
//! classes further, so every superset of a QID is a QID too; the search
//! below reports the inclusion-minimal ones.

use itertools::Itertools;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::partition::partition_by_qid;
use crate::table::{Table, Value};

/// Default cap on subset size for [`find_minimal_qids`].
pub const DEFAULT_MAX_SET_SIZE: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QidCheck {
    pub is_qid: bool,
    /// QID tuples that occur exactly once.
    pub witnesses: Vec<Vec<Value>>,
}

pub fn is_qid<S: AsRef<str>>(table: &Table, attrs: &[S]) -> Result<QidCheck> {
    if attrs.is_empty() {
        return Err(Error::InvalidParameter("QID attribute list is empty".into()));
    }
    let partition = partition_by_qid(table, attrs)?;
    let witnesses: Vec<Vec<Value>> = partition
        .classes
        .into_iter()
        .filter(|c| c.size() == 1)
        .map(|c| c.qid_values)
        .collect();
    Ok(QidCheck {
        is_qid: !witnesses.is_empty(),
        witnesses,
    })
}

/// All inclusion-minimal QIDs among subsets of `candidates` with at most
/// `max_set_size` attributes, smallest first, then in candidate order.
///
/// Larger minimal QIDs beyond the cap are not reported.
pub fn find_minimal_qids<S: AsRef<str>>(
    table: &Table,
    candidates: &[S],
    max_set_size: usize,
) -> Result<Vec<Vec<String>>> {
    let names: Vec<&str> = candidates.iter().map(AsRef::as_ref).collect();
    table.column_indices(&names)?;
    let mut found: Vec<Vec<&str>> = Vec::new();
    for size in 1..=max_set_size.min(names.len()) {
        for subset in names.iter().copied().combinations(size) {
            if found.iter().any(|q| q.iter().all(|a| subset.contains(a))) {
                continue;
            }
            if is_qid(table, &subset)?.is_qid {
                found.push(subset);
            }
        }
    }
    Ok(found
        .into_iter()
        .map(|q| q.into_iter().map(str::to_string).collect())
        .collect())
}
