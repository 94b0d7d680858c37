//! Per-attribute generalization hierarchies.
//!
//! Level 0 is always the identity and the top level maps every value to
//! the root label `*`. Two flavours exist:
//!
//! * interval hierarchies for numeric attributes, given as bin widths per
//!   level (`[10]` bins ages into `[30;39]`, `[20;29]`, ...). Each width
//!   must divide the next so bins nest;
//! * taxonomy hierarchies, given as one value → label mapping per level.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::table::{Interval, Value, ROOT_LABEL};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
enum Levels {
    Intervals { interval_widths: Vec<u64> },
    Taxonomy { levels: Vec<BTreeMap<String, String>> },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneralizationHierarchy {
    attribute: String,
    #[serde(flatten)]
    levels: Levels,
}

impl GeneralizationHierarchy {
    /// Interval hierarchy with bins of the given widths, aligned at
    /// multiples of the width. A root level is appended on top.
    pub fn intervals(attribute: impl Into<String>, widths: Vec<u64>) -> Result<Self> {
        let attribute = attribute.into();
        let invalid = |reason: String| Error::InvalidHierarchy {
            attribute: attribute.clone(),
            reason,
        };
        if widths.contains(&0) {
            return Err(invalid("interval widths must be positive".into()));
        }
        for pair in widths.windows(2) {
            if pair[1] % pair[0] != 0 {
                return Err(invalid(format!(
                    "width {} is not a multiple of {}; bins would not nest",
                    pair[1], pair[0]
                )));
            }
        }
        Ok(Self {
            attribute,
            levels: Levels::Intervals {
                interval_widths: widths,
            },
        })
    }

    /// Taxonomy hierarchy from explicit per-level mappings (level 1 first).
    ///
    /// Every level must map the same ground domain, and two values that
    /// share a label at some level must share labels at all higher levels.
    /// If the last level has more than one label, a root level is added.
    pub fn taxonomy(attribute: impl Into<String>, mut levels: Vec<BTreeMap<String, String>>) -> Result<Self> {
        let attribute = attribute.into();
        let invalid = |reason: String| Error::InvalidHierarchy {
            attribute: attribute.clone(),
            reason,
        };
        if let Some(first) = levels.first() {
            let domain: BTreeSet<&String> = first.keys().collect();
            for (j, level) in levels.iter().enumerate().skip(1) {
                if level.keys().collect::<BTreeSet<_>>() != domain {
                    return Err(invalid(format!("level {} does not cover the level-1 domain", j + 1)));
                }
            }
            for (j, pair) in levels.windows(2).enumerate() {
                let mut up: BTreeMap<&String, &String> = BTreeMap::new();
                for (value, label) in &pair[0] {
                    let higher = &pair[1][value];
                    if let Some(prev) = up.insert(label, higher) {
                        if prev != higher {
                            return Err(invalid(format!(
                                "label {label:?} at level {} splits at level {}",
                                j + 1,
                                j + 2
                            )));
                        }
                    }
                }
            }
            let top: BTreeSet<&String> = levels.last().map(|l| l.values().collect()).unwrap_or_default();
            if top.len() > 1 {
                let root = first.keys().map(|k| (k.clone(), ROOT_LABEL.to_string())).collect();
                levels.push(root);
            }
        }
        Ok(Self {
            attribute,
            levels: Levels::Taxonomy { levels },
        })
    }

    pub fn attribute(&self) -> &str {
        &self.attribute
    }

    pub fn max_level(&self) -> usize {
        match &self.levels {
            Levels::Intervals { interval_widths } => interval_widths.len() + 1,
            Levels::Taxonomy { levels } => levels.len(),
        }
    }

    /// The label of `value` at `level`.
    pub fn generalize(&self, value: &Value, level: usize) -> Result<Value> {
        let max = self.max_level();
        if level > max {
            return Err(Error::LevelOutOfRange {
                attribute: self.attribute.clone(),
                level,
                max,
            });
        }
        if level == 0 {
            return Ok(value.clone());
        }
        match &self.levels {
            Levels::Intervals { interval_widths } => {
                if level == max {
                    return Ok(Value::text(ROOT_LABEL));
                }
                let width = interval_widths[level - 1] as f64;
                let bin = |x: f64| (x.floor() / width).floor() * width;
                let lo = match value {
                    Value::Number(x) => bin(*x),
                    // An interval generalizes only if it sits inside one bin.
                    Value::Interval(i) if bin(i.lo) == bin(i.hi) => bin(i.lo),
                    _ => return Err(self.unmapped(value)),
                };
                Ok(Value::Interval(Interval::new(lo, lo + width - 1.0)))
            }
            Levels::Taxonomy { levels } => {
                let key = value.to_string();
                levels[level - 1]
                    .get(&key)
                    .map(|label| Value::text(label.clone()))
                    .ok_or_else(|| self.unmapped(value))
            }
        }
    }

    /// True if `label` is the generalization of `ground` at some level.
    pub fn generalizes_to(&self, ground: &Value, label: &Value) -> bool {
        (0..=self.max_level()).any(|j| self.generalize(ground, j).ok().as_ref() == Some(label))
    }

    fn unmapped(&self, value: &Value) -> Error {
        Error::UnmappedValue {
            attribute: self.attribute.clone(),
            value: value.to_string(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn decades() -> GeneralizationHierarchy {
        GeneralizationHierarchy::intervals("age", vec![10]).unwrap()
    }

    fn clubs() -> GeneralizationHierarchy {
        let l1 = [("PSG", "Ligue 1"), ("OM", "Ligue 1"), ("Bayern", "Bundesliga")]
            .iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect();
        GeneralizationHierarchy::taxonomy("Club", vec![l1]).unwrap()
    }

    #[test]
    fn decade_labels() {
        let h = decades();
        assert_eq!(h.max_level(), 2);
        assert_eq!(h.generalize(&Value::number(35.0), 1).unwrap().to_string(), "[30;39]");
        assert_eq!(h.generalize(&Value::number(20.0), 1).unwrap().to_string(), "[20;29]");
        assert_eq!(h.generalize(&Value::number(35.0), 2).unwrap().to_string(), "*");
        assert_eq!(h.generalize(&Value::number(35.0), 0).unwrap(), Value::number(35.0));
    }

    #[test]
    fn level_out_of_range() {
        assert!(matches!(
            decades().generalize(&Value::number(1.0), 3),
            Err(Error::LevelOutOfRange { max: 2, .. })
        ));
    }

    #[test]
    fn non_nesting_widths_rejected() {
        assert!(GeneralizationHierarchy::intervals("age", vec![10, 15]).is_err());
        assert!(GeneralizationHierarchy::intervals("age", vec![0]).is_err());
    }

    #[test]
    fn taxonomy_root_appended() {
        let h = clubs();
        assert_eq!(h.max_level(), 2);
        assert_eq!(h.generalize(&Value::text("OM"), 1).unwrap(), Value::text("Ligue 1"));
        assert_eq!(h.generalize(&Value::text("OM"), 2).unwrap(), Value::text("*"));
        assert!(matches!(
            h.generalize(&Value::text("Lyon"), 1),
            Err(Error::UnmappedValue { .. })
        ));
    }

    #[test]
    fn taxonomy_single_label_top_is_root() {
        let top = [("PSG", "*"), ("OM", "*")]
            .iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect();
        let h = GeneralizationHierarchy::taxonomy("Club", vec![top]).unwrap();
        assert_eq!(h.max_level(), 1);
    }

    #[test]
    fn taxonomy_split_rejected() {
        let m = |pairs: &[(&str, &str)]| -> BTreeMap<String, String> {
            pairs.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
        };
        let l1 = m(&[("a", "x"), ("b", "x"), ("c", "y")]);
        let l2 = m(&[("a", "p"), ("b", "q"), ("c", "q")]);
        assert!(GeneralizationHierarchy::taxonomy("t", vec![l1, l2]).is_err());
    }

    #[test]
    fn generalizes_to_finds_any_level() {
        let h = decades();
        let label = Value::Interval(Interval::new(30.0, 39.0));
        assert!(h.generalizes_to(&Value::number(32.0), &label));
        assert!(!h.generalizes_to(&Value::number(27.0), &label));
    }

    proptest! {
        // Values sharing a label at level i share it at every level above.
        #[test]
        fn interval_levels_nest(a in -500i64..500, b in -500i64..500, mult in prop::collection::vec(1u64..4, 1..4)) {
            let mut widths = vec![2u64];
            for m in mult {
                let last = *widths.last().unwrap();
                widths.push(last * m);
            }
            let h = GeneralizationHierarchy::intervals("x", widths).unwrap();
            let (va, vb) = (Value::number(a as f64), Value::number(b as f64));
            for i in 0..=h.max_level() {
                if h.generalize(&va, i).unwrap() == h.generalize(&vb, i).unwrap() {
                    for j in i..=h.max_level() {
                        prop_assert_eq!(h.generalize(&va, j).unwrap(), h.generalize(&vb, j).unwrap());
                    }
                }
                // generalizing the level-i label again lands on the level-j label
                let label = h.generalize(&va, i).unwrap();
                if let Value::Interval(_) = label {
                    for j in i..h.max_level() {
                        prop_assert_eq!(h.generalize(&label, j).unwrap(), h.generalize(&va, j).unwrap());
                    }
                }
            }
        }
    }
}
