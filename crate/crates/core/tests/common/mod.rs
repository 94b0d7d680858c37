//! Seeded random instances and brute-force reference implementations.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use anonkit::{
    generalize_table, AttributeKind, AttributeRole, AttributeSchema, BigRational, GeneralizationHierarchy,
    Hierarchies, Scalar, Table, Value,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Instance {
    pub table: Table,
    pub qid: Vec<String>,
    pub sensitive: String,
}

/// Up to 50 rows and 4 attributes: 1–3 QID columns (numeric or
/// categorical, small domains so classes collide) plus one sensitive.
pub fn random_instance(seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = rng.gen_range(1..=50);
    let n_qid = rng.gen_range(1..=3);
    let mut schema = Vec::new();
    let mut kinds = Vec::new();
    for i in 0..n_qid {
        let kind = if rng.gen_bool(0.5) {
            AttributeKind::Numeric
        } else {
            AttributeKind::Categorical
        };
        schema.push(AttributeSchema::new(format!("q{i}"), kind, AttributeRole::QuasiIdentifier));
        kinds.push((kind, rng.gen_range(1..=5u32)));
    }
    schema.push(AttributeSchema::new("s", AttributeKind::Categorical, AttributeRole::Sensitive));
    let sens_domain = rng.gen_range(1..=4u32);
    let data = (0..rows)
        .map(|_| {
            let mut row: Vec<Value> = kinds
                .iter()
                .map(|&(kind, d)| {
                    let x = rng.gen_range(0..d);
                    match kind {
                        AttributeKind::Numeric => Value::number(x as f64),
                        _ => Value::text(format!("c{x}")),
                    }
                })
                .collect();
            row.push(Value::text(format!("s{}", rng.gen_range(0..sens_domain))));
            row
        })
        .collect();
    Instance {
        table: Table::new(schema, data).unwrap(),
        qid: (0..n_qid).map(|i| format!("q{i}")).collect(),
        sensitive: "s".into(),
    }
}

fn tuple(table: &Table, cols: &[usize], row: usize) -> Vec<Value> {
    cols.iter().map(|&c| table.rows()[row][c].clone()).collect()
}

/// Rows sharing row `r`'s QID tuple, by pairwise comparison.
pub fn naive_class(table: &Table, cols: &[usize], r: usize) -> Vec<usize> {
    let key = tuple(table, cols, r);
    (0..table.row_count()).filter(|&j| tuple(table, cols, j) == key).collect()
}

/// Distinct classes, ordered by first member.
pub fn naive_classes(table: &Table, cols: &[usize]) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = Vec::new();
    for r in 0..table.row_count() {
        if !out.iter().any(|c| c.contains(&r)) {
            out.push(naive_class(table, cols, r));
        }
    }
    out
}

pub fn naive_is_qid(table: &Table, cols: &[usize]) -> bool {
    (0..table.row_count()).any(|r| naive_class(table, cols, r).len() == 1)
}

pub fn naive_k(table: &Table, cols: &[usize]) -> usize {
    (0..table.row_count()).map(|r| naive_class(table, cols, r).len()).min().unwrap_or(0)
}

pub fn naive_distinct(table: &Table, class: &[usize], sens: usize) -> usize {
    class.iter().map(|&r| &table.rows()[r][sens]).collect::<BTreeSet<_>>().len()
}

pub fn naive_l(table: &Table, cols: &[usize], sens: usize) -> usize {
    naive_classes(table, cols)
        .iter()
        .map(|c| naive_distinct(table, c, sens))
        .min()
        .unwrap_or(0)
}

pub fn q(num: u64, den: u64) -> BigRational {
    BigRational::ratio(num, den)
}

pub fn naive_prosecutor(table: &Table, cols: &[usize]) -> Vec<BigRational> {
    (0..table.row_count())
        .map(|r| q(1, naive_class(table, cols, r).len() as u64))
        .collect()
}

pub fn naive_journalist(table: &Table, cols: &[usize]) -> BigRational {
    let mut miss = q(1, 1);
    for c in naive_classes(table, cols) {
        let n = c.len() as u64;
        miss *= q(n - 1, n);
    }
    q(1, 1) - miss
}

pub fn naive_marketer(table: &Table, cols: &[usize]) -> BigRational {
    q(naive_classes(table, cols).len() as u64, table.row_count() as u64)
}

pub struct LatticeInstance {
    pub table: Table,
    pub qid: Vec<String>,
    pub hierarchies: Hierarchies,
    pub k: usize,
    pub l: Option<usize>,
    pub sensitive: String,
    pub budget: f64,
}

/// Numeric QIDs with interval hierarchies; at most 4³ = 64 lattice nodes.
pub fn lattice_instance(seed: u64) -> LatticeInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let rows = rng.gen_range(2..=40);
    let n_qid = rng.gen_range(1..=3);
    let mut schema = Vec::new();
    let mut hierarchies = BTreeMap::new();
    for i in 0..n_qid {
        let name = format!("q{i}");
        schema.push(AttributeSchema::new(&name, AttributeKind::Numeric, AttributeRole::QuasiIdentifier));
        let widths = if rng.gen_bool(0.5) { vec![2] } else { vec![2, 4] };
        hierarchies.insert(name.clone(), GeneralizationHierarchy::intervals(name, widths).unwrap());
    }
    schema.push(AttributeSchema::new("s", AttributeKind::Categorical, AttributeRole::Sensitive));
    let data = (0..rows)
        .map(|_| {
            let mut row: Vec<Value> = (0..n_qid).map(|_| Value::number(rng.gen_range(0..8) as f64)).collect();
            row.push(Value::text(format!("s{}", rng.gen_range(0..3))));
            row
        })
        .collect();
    let budget = [0.0, 0.1, 0.25, 0.5][rng.gen_range(0..4)];
    LatticeInstance {
        table: Table::new(schema, data).unwrap(),
        qid: (0..n_qid).map(|i| format!("q{i}")).collect(),
        hierarchies,
        k: rng.gen_range(1..=4),
        l: rng.gen_bool(0.3).then(|| rng.gen_range(1..=2)),
        sensitive: "s".into(),
        budget,
    }
}

pub struct NodeOutcome {
    pub levels: Vec<usize>,
    pub suppressed: Vec<usize>,
    pub feasible: bool,
    pub loss: BigRational,
}

/// Every level vector of the lattice, in odometer order.
pub fn all_nodes(max_levels: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![vec![0; max_levels.len()]];
    loop {
        let mut next = out.last().unwrap().clone();
        let mut i = next.len();
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if next[i] < max_levels[i] {
                next[i] += 1;
                break;
            }
            next[i] = 0;
        }
        out.push(next);
    }
}

/// Evaluates one node: suppress every class below k (or below l distinct
/// sensitive values), then score it.
pub fn evaluate_node(inst: &LatticeInstance, levels: &[usize]) -> NodeOutcome {
    let map: BTreeMap<String, usize> = inst.qid.iter().cloned().zip(levels.iter().copied()).collect();
    let generalized = generalize_table(&inst.table, &inst.hierarchies, &map).unwrap();
    let cols = generalized.column_indices(&inst.qid).unwrap();
    let sens = generalized.column_index(&inst.sensitive).unwrap();
    let mut suppressed: Vec<usize> = naive_classes(&generalized, &cols)
        .into_iter()
        .filter(|c| c.len() < inst.k || inst.l.is_some_and(|l| naive_distinct(&generalized, c, sens) < l))
        .flatten()
        .collect();
    suppressed.sort_unstable();
    let n = inst.table.row_count();
    let allowed = (inst.budget * n as f64 + 1e-9).floor() as usize;
    let mut loss = q(0, 1);
    for (a, &lv) in inst.qid.iter().zip(levels) {
        loss += q(lv as u64, inst.hierarchies[a].max_level() as u64);
    }
    loss = loss / BigRational::from_count(inst.qid.len() as u64) + q(suppressed.len() as u64, n as u64);
    NodeOutcome {
        levels: levels.to_vec(),
        feasible: suppressed.len() <= allowed && suppressed.len() < n,
        suppressed,
        loss,
    }
}

pub fn max_levels(inst: &LatticeInstance) -> Vec<usize> {
    inst.qid.iter().map(|a| inst.hierarchies[a].max_level()).collect()
}

/// Minimum by (loss, level sum, lexicographic) over every feasible node.
pub fn brute_force_optimum(inst: &LatticeInstance) -> Option<NodeOutcome> {
    all_nodes(&max_levels(inst))
        .iter()
        .map(|lv| evaluate_node(inst, lv))
        .filter(|o| o.feasible)
        .min_by(|a, b| {
            let key = |o: &NodeOutcome| (o.loss.clone(), o.levels.iter().sum::<usize>(), o.levels.clone());
            key(a).cmp(&key(b))
        })
}
