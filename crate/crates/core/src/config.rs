//! JSON description of a dataset: schema plus generalization hierarchies.
//!
//! ```json
//! {
//!   "attributes": [{"name": "age", "kind": "numeric", "role": "quasi_identifier"}],
//!   "hierarchies": [
//!     {"attribute": "age", "interval_widths": [10]},
//!     {"attribute": "Club", "levels": [{"PSG": "*", "OM": "*"}]}
//!   ]
//! }
//! ```

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::anonymizer::Hierarchies;
use crate::error::{Error, Result};
use crate::hierarchy::GeneralizationHierarchy;
use crate::table::{AttributeSchema, Table};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum HierarchySpec {
    Intervals {
        attribute: String,
        interval_widths: Vec<u64>,
    },
    Taxonomy {
        attribute: String,
        levels: Vec<BTreeMap<String, String>>,
    },
}

impl HierarchySpec {
    pub fn attribute(&self) -> &str {
        match self {
            HierarchySpec::Intervals { attribute, .. } | HierarchySpec::Taxonomy { attribute, .. } => attribute,
        }
    }

    pub fn build(&self) -> Result<GeneralizationHierarchy> {
        match self {
            HierarchySpec::Intervals {
                attribute,
                interval_widths,
            } => GeneralizationHierarchy::intervals(attribute.clone(), interval_widths.clone()),
            HierarchySpec::Taxonomy { attribute, levels } => {
                GeneralizationHierarchy::taxonomy(attribute.clone(), levels.clone())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DatasetConfig {
    pub attributes: Vec<AttributeSchema>,
    #[serde(default)]
    pub hierarchies: Vec<HierarchySpec>,
}

impl DatasetConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load_table(&self, csv: &[u8]) -> Result<Table> {
        Table::from_csv(csv, self.attributes.clone())
    }

    /// Builds every hierarchy; each must name a schema attribute, at most once.
    pub fn hierarchies(&self) -> Result<Hierarchies> {
        let mut out = Hierarchies::new();
        for spec in &self.hierarchies {
            if !self.attributes.iter().any(|a| a.name == spec.attribute()) {
                return Err(Error::UnknownAttribute(spec.attribute().to_string()));
            }
            if out.insert(spec.attribute().to_string(), spec.build()?).is_some() {
                return Err(Error::InvalidHierarchy {
                    attribute: spec.attribute().to_string(),
                    reason: "declared twice".into(),
                });
            }
        }
        Ok(out)
    }
}
