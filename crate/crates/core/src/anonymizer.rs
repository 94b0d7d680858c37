//! k-anonymization by full-domain generalization plus class suppression.
//!
//! Every node of the generalization lattice (one level per QID attribute)
//! is a candidate. A node is evaluated by generalizing the QID columns and
//! then suppressing every class that violates a requested constraint; for
//! t-closeness this repeats until no class violates, since removing rows
//! shifts the global distribution. The node is feasible when the
//! suppressed fraction fits the budget. Among feasible nodes the one with
//! least information loss wins, ties going to the smaller level sum and
//! then the lexicographically smaller level vector.

use std::collections::{BTreeMap, BTreeSet};

use num_rational::BigRational;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hierarchy::GeneralizationHierarchy;
use crate::partition::partition_rows;
use crate::privacy::{check_k_anonymity, check_l_diversity, check_t_closeness, ModelVerdict};
use crate::scalar::Scalar;
use crate::table::{AttributeRole, Table, Value};

pub type Hierarchies = BTreeMap<String, GeneralizationHierarchy>;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Constraints {
    pub k: usize,
    pub l: Option<usize>,
    pub t: Option<f64>,
    /// Required when `l` or `t` is set.
    pub sensitive: Option<String>,
}

impl Constraints {
    pub fn k_anonymity(k: usize) -> Self {
        Self {
            k,
            l: None,
            t: None,
            sensitive: None,
        }
    }

    pub fn with_l_diversity(mut self, sensitive: impl Into<String>, l: usize) -> Self {
        self.sensitive = Some(sensitive.into());
        self.l = Some(l);
        self
    }

    pub fn with_t_closeness(mut self, sensitive: impl Into<String>, t: f64) -> Self {
        self.sensitive = Some(sensitive.into());
        self.t = Some(t);
        self
    }

    fn validate(&self, table: &Table) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidParameter("k must be ≥ 1".into()));
        }
        if self.l == Some(0) {
            return Err(Error::InvalidParameter("l must be ≥ 1".into()));
        }
        if let Some(t) = self.t {
            if !(0.0..=1.0).contains(&t) {
                return Err(Error::InvalidParameter(format!("t must lie in [0, 1], got {t}")));
            }
        }
        match &self.sensitive {
            Some(s) => {
                table.column_index(s)?;
            }
            None if self.l.is_some() || self.t.is_some() => {
                return Err(Error::InvalidParameter(
                    "a sensitive attribute is required for l-diversity or t-closeness".into(),
                ));
            }
            None => {}
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SearchStrategy {
    /// Visit nodes bottom-up, skipping ancestors of zero-suppression
    /// solutions and nodes whose generalization loss alone cannot win.
    #[default]
    Pruned,
    /// Evaluate every node (in parallel) and reduce.
    Exhaustive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LatticeNode {
    pub attributes: Vec<String>,
    pub levels: Vec<usize>,
    pub loss: f64,
    pub feasible: bool,
    pub suppressed_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnonymizationResult {
    #[serde(skip)]
    pub output_table: Table,
    pub chosen_node: LatticeNode,
    pub suppressed_row_indices: Vec<usize>,
    pub verdicts: Vec<ModelVerdict>,
    pub loss: f64,
    pub nodes_evaluated: usize,
}

/// Every level vector with `0 ≤ v[i] ≤ max_levels[i]`, ordered by level sum
/// and then lexicographically.
pub fn build_lattice(max_levels: &[usize]) -> Vec<Vec<usize>> {
    let mut nodes = vec![Vec::with_capacity(max_levels.len())];
    for &max in max_levels {
        nodes = nodes
            .into_iter()
            .flat_map(|prefix: Vec<usize>| {
                (0..=max).map(move |level| {
                    let mut node = prefix.clone();
                    node.push(level);
                    node
                })
            })
            .collect();
    }
    nodes.sort_by(|a, b| level_sum(a).cmp(&level_sum(b)).then_with(|| a.cmp(b)));
    nodes
}

fn level_sum(levels: &[usize]) -> usize {
    levels.iter().sum()
}

/// Mean normalized generalization level plus suppressed fraction, in `[0, 2]`.
/// Attributes with `max_level = 0` contribute nothing.
pub fn information_loss<S: Scalar>(levels: &[usize], max_levels: &[usize], suppressed: usize, total_rows: usize) -> S {
    let mut loss = S::zero();
    if !levels.is_empty() {
        let intensity = levels
            .iter()
            .zip(max_levels)
            .filter(|(_, &max)| max > 0)
            .fold(S::zero(), |acc, (&l, &max)| acc + S::ratio(l as u64, max as u64));
        loss = intensity / S::from_count(levels.len() as u64);
    }
    if total_rows > 0 {
        loss = loss + S::ratio(suppressed as u64, total_rows as u64);
    }
    loss
}

/// Replaces each listed attribute by its label at the given level and drops
/// identifier columns. Attributes without a hierarchy only accept level 0.
pub fn generalize_table(table: &Table, hierarchies: &Hierarchies, levels: &BTreeMap<String, usize>) -> Result<Table> {
    let mut out = table.clone();
    for (attr, &level) in levels {
        let col = table.column_index(attr)?;
        if level == 0 {
            continue;
        }
        let hierarchy = hierarchies.get(attr).ok_or_else(|| Error::LevelOutOfRange {
            attribute: attr.clone(),
            level,
            max: 0,
        })?;
        for row in out.rows_mut() {
            row[col] = hierarchy.generalize(&row[col], level)?;
        }
    }
    Ok(out.without_identifiers())
}

pub fn anonymize<S: AsRef<str>>(
    table: &Table,
    qid: &[S],
    hierarchies: &Hierarchies,
    constraints: &Constraints,
    suppression_budget: f64,
) -> Result<AnonymizationResult> {
    anonymize_with(table, qid, hierarchies, constraints, suppression_budget, SearchStrategy::default())
}

pub fn anonymize_with<S: AsRef<str>>(
    table: &Table,
    qid: &[S],
    hierarchies: &Hierarchies,
    constraints: &Constraints,
    suppression_budget: f64,
    strategy: SearchStrategy,
) -> Result<AnonymizationResult> {
    let search = Search::new(table, qid, hierarchies, constraints, suppression_budget)?;
    let nodes = build_lattice(&search.max_levels);

    let (best, evaluated) = match strategy {
        SearchStrategy::Exhaustive => {
            let evaluations = nodes
                .par_iter()
                .map(|n| search.evaluate(n))
                .collect::<Result<Vec<_>>>()?;
            let count = evaluations.len();
            let best = evaluations
                .iter()
                .filter(|e| e.feasible)
                .min_by(|a, b| a.key().cmp(&b.key()))
                .cloned();
            if best.is_none() {
                return Err(search.infeasible(&evaluations));
            }
            (best, count)
        }
        SearchStrategy::Pruned => {
            let mut best: Option<Evaluation> = None;
            let mut zero_suppression: Vec<&Vec<usize>> = Vec::new();
            let mut seen = Vec::new();
            for node in &nodes {
                if zero_suppression.iter().any(|z| dominates(node, z)) {
                    continue;
                }
                if let Some(b) = &best {
                    if search.generalization_loss(node) >= b.loss {
                        continue;
                    }
                }
                let e = search.evaluate(node)?;
                if e.feasible {
                    if e.suppressed.is_empty() {
                        zero_suppression.push(node);
                    }
                    if best.as_ref().is_none_or(|b| e.key() < b.key()) {
                        best = Some(e.clone());
                    }
                }
                seen.push(e);
            }
            if best.is_none() {
                return Err(search.infeasible(&seen));
            }
            (best, seen.len())
        }
    };
    let best = best.expect("checked above");
    search.finish(best, evaluated)
}

/// `node ≥ base` component-wise and `node ≠ base`.
fn dominates(node: &[usize], base: &[usize]) -> bool {
    node != base && node.iter().zip(base).all(|(a, b)| a >= b)
}

#[derive(Debug, Clone)]
struct Evaluation {
    levels: Vec<usize>,
    suppressed: Vec<usize>,
    min_class: usize,
    feasible: bool,
    loss: BigRational,
}

impl Evaluation {
    fn key(&self) -> (&BigRational, usize, &[usize]) {
        (&self.loss, level_sum(&self.levels), &self.levels)
    }
}

struct Search<'a> {
    table: &'a Table,
    qid: Vec<String>,
    hierarchies: &'a Hierarchies,
    max_levels: Vec<usize>,
    constraints: &'a Constraints,
    allowed_suppression: usize,
}

impl<'a> Search<'a> {
    fn new<S: AsRef<str>>(
        table: &'a Table,
        qid: &[S],
        hierarchies: &'a Hierarchies,
        constraints: &'a Constraints,
        budget: f64,
    ) -> Result<Self> {
        constraints.validate(table)?;
        if !(0.0..=1.0).contains(&budget) {
            return Err(Error::InvalidParameter(format!(
                "suppression budget must lie in [0, 1], got {budget}"
            )));
        }
        let qid: Vec<String> = qid.iter().map(|s| s.as_ref().to_string()).collect();
        if qid.is_empty() {
            return Err(Error::InvalidParameter("QID attribute list is empty".into()));
        }
        for name in &qid {
            if table.attribute(name)?.role == AttributeRole::Identifier {
                return Err(Error::InvalidParameter(format!(
                    "identifier attribute {name:?} cannot be part of a published QID"
                )));
            }
        }
        if let Some(s) = &constraints.sensitive {
            if qid.contains(s) {
                return Err(Error::InvalidParameter(format!("sensitive attribute {s:?} is also in the QID")));
            }
        }
        let max_levels = qid
            .iter()
            .map(|a| hierarchies.get(a).map_or(0, GeneralizationHierarchy::max_level))
            .collect();
        let allowed_suppression = (budget * table.row_count() as f64 + 1e-9).floor() as usize;
        Ok(Self {
            table,
            qid,
            hierarchies,
            max_levels,
            constraints,
            allowed_suppression,
        })
    }

    fn level_map(&self, levels: &[usize]) -> BTreeMap<String, usize> {
        self.qid.iter().cloned().zip(levels.iter().copied()).collect()
    }

    fn generalization_loss(&self, levels: &[usize]) -> BigRational {
        information_loss(levels, &self.max_levels, 0, 0)
    }

    fn violating_rows(&self, published: &Table, cols: &[usize], kept: &[usize]) -> Result<BTreeSet<usize>> {
        let partition = partition_rows(published, &self.qid, cols, kept);
        let mut bad: BTreeSet<Vec<Value>> = check_k_anonymity(&partition, self.constraints.k)
            .violating_classes
            .into_iter()
            .collect();
        if let Some(sensitive) = &self.constraints.sensitive {
            if let Some(l) = self.constraints.l {
                bad.extend(check_l_diversity(published, &partition, sensitive, l)?.violating_classes);
            }
            if let Some(t) = self.constraints.t {
                if !partition.is_empty() {
                    bad.extend(check_t_closeness(published, &partition, sensitive, t)?.violating_classes);
                }
            }
        }
        Ok(partition
            .classes
            .into_iter()
            .filter(|c| bad.contains(&c.qid_values))
            .flat_map(|c| c.row_indices)
            .collect())
    }

    fn evaluate(&self, levels: &[usize]) -> Result<Evaluation> {
        let published = generalize_table(self.table, self.hierarchies, &self.level_map(levels))?;
        let cols = published.column_indices(&self.qid)?;
        let n = published.row_count();
        let mut kept: Vec<usize> = (0..n).collect();
        let min_class = partition_rows(&published, &self.qid, &cols, &kept)
            .classes
            .iter()
            .map(|c| c.size())
            .min()
            .unwrap_or(0);
        loop {
            let bad = self.violating_rows(&published, &cols, &kept)?;
            if bad.is_empty() {
                break;
            }
            kept.retain(|r| !bad.contains(r));
        }
        let kept_set: BTreeSet<usize> = kept.iter().copied().collect();
        let suppressed: Vec<usize> = (0..n).filter(|r| !kept_set.contains(r)).collect();
        let feasible = suppressed.len() <= self.allowed_suppression && !(n > 0 && kept.is_empty());
        let loss = information_loss(levels, &self.max_levels, suppressed.len(), n);
        Ok(Evaluation {
            levels: levels.to_vec(),
            suppressed,
            min_class,
            feasible,
            loss,
        })
    }

    fn infeasible(&self, evaluations: &[Evaluation]) -> Error {
        Error::NoFeasibleNode {
            best_k: evaluations.iter().map(|e| e.min_class).max().unwrap_or(0),
            min_suppressed: evaluations.iter().map(|e| e.suppressed.len()).min().unwrap_or(0),
            rows: self.table.row_count(),
        }
    }

    fn finish(&self, best: Evaluation, evaluated: usize) -> Result<AnonymizationResult> {
        let published = generalize_table(self.table, self.hierarchies, &self.level_map(&best.levels))?;
        let suppressed: BTreeSet<usize> = best.suppressed.iter().copied().collect();
        let kept: Vec<usize> = (0..published.row_count()).filter(|r| !suppressed.contains(r)).collect();
        let output = published.select_rows(&kept);
        let partition = crate::partition::partition_by_qid(&output, &self.qid)?;

        let mut verdicts = vec![check_k_anonymity(&partition, self.constraints.k)];
        if let Some(sensitive) = &self.constraints.sensitive {
            if let Some(l) = self.constraints.l {
                verdicts.push(check_l_diversity(&output, &partition, sensitive, l)?);
            }
            if let Some(t) = self.constraints.t {
                verdicts.push(check_t_closeness(&output, &partition, sensitive, t)?);
            }
        }
        let loss = best.loss.to_f64_lossy();
        Ok(AnonymizationResult {
            output_table: output,
            chosen_node: LatticeNode {
                attributes: self.qid.clone(),
                levels: best.levels,
                loss,
                feasible: true,
                suppressed_count: best.suppressed.len(),
            },
            suppressed_row_indices: best.suppressed,
            verdicts,
            loss,
            nodes_evaluated: evaluated,
        })
    }
}
