//! Equivalence-class decomposition of a table under a QID.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::Result;
use crate::table::{Table, Value};

/// Rows sharing one QID value combination.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EquivalenceClass {
    pub qid_values: Vec<Value>,
    pub row_indices: Vec<usize>,
}

impl EquivalenceClass {
    pub fn size(&self) -> usize {
        self.row_indices.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Partition {
    pub qid: Vec<String>,
    /// Sorted by QID tuple.
    pub classes: Vec<EquivalenceClass>,
}

impl Partition {
    pub fn row_count(&self) -> usize {
        self.classes.iter().map(EquivalenceClass::size).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn class_sizes(&self) -> Vec<usize> {
        self.classes.iter().map(EquivalenceClass::size).collect()
    }

    /// The class containing `row`, if that row is covered.
    pub fn class_of(&self, row: usize) -> Option<&EquivalenceClass> {
        self.classes.iter().find(|c| c.row_indices.contains(&row))
    }
}

/// Groups rows by exact equality of their QID tuple.
///
/// An empty QID puts every row in one class (or no class for an empty table).
pub fn partition_by_qid<S: AsRef<str>>(table: &Table, qid: &[S]) -> Result<Partition> {
    let cols = table.column_indices(qid)?;
    let rows: Vec<usize> = (0..table.row_count()).collect();
    Ok(partition_rows(table, qid, &cols, &rows))
}

pub(crate) fn partition_rows<S: AsRef<str>>(
    table: &Table,
    qid: &[S],
    cols: &[usize],
    rows: &[usize],
) -> Partition {
    let mut groups: BTreeMap<Vec<Value>, Vec<usize>> = BTreeMap::new();
    for &r in rows {
        let key = cols.iter().map(|&c| table.cell(r, c).clone()).collect();
        groups.entry(key).or_default().push(r);
    }
    Partition {
        qid: qid.iter().map(|s| s.as_ref().to_string()).collect(),
        classes: groups
            .into_iter()
            .map(|(qid_values, row_indices)| EquivalenceClass {
                qid_values,
                row_indices,
            })
            .collect(),
    }
}
