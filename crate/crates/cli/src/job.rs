//! Job configuration: one JSON document per job, with command-line
//! overrides applied on top.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use anonkit::{AttributeRole, AttributeSchema, DatasetConfig, HierarchySpec};
use serde::{Deserialize, Serialize};

/// Environment variable naming the directory relative `--config` paths
/// are resolved against.
pub const CONFIG_DIR_ENV: &str = "ANONKIT_CONFIG_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Task {
    #[serde(rename = "analyze-qid")]
    AnalyzeQid,
    #[serde(rename = "check")]
    Check,
    #[serde(rename = "anonymize")]
    Anonymize,
    #[serde(rename = "risk")]
    Risk,
    #[serde(rename = "utility")]
    Utility,
    #[serde(rename = "dp rr-simulate")]
    DpRrSimulate,
    #[serde(rename = "dp bound")]
    DpBound,
    #[serde(rename = "dp ledger")]
    DpLedger,
}

impl Task {
    pub fn is_tabular(self) -> bool {
        !matches!(self, Task::DpRrSimulate | Task::DpBound | Task::DpLedger)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DpSection {
    pub n: Option<u64>,
    pub true_count: Option<u64>,
    pub p_honest: Option<f64>,
    pub epsilon: Option<f64>,
    pub n_values: Option<u64>,
    pub budget: Option<f64>,
    /// Number of planned releases for a budgeted ledger.
    pub releases: Option<usize>,
    pub ledger: Option<PathBuf>,
    pub spend: Option<f64>,
    pub spend_delta: Option<f64>,
    pub label: Option<String>,
    pub dataset_tag: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub input: Option<PathBuf>,
    #[serde(default)]
    pub attributes: Vec<AttributeSchema>,
    #[serde(default)]
    pub hierarchies: Vec<HierarchySpec>,
    /// Defaults to every quasi-identifier-role attribute.
    pub qid: Option<Vec<String>>,
    /// Defaults to the first sensitive-role attribute.
    pub sensitive: Option<String>,
    pub k: Option<usize>,
    pub l: Option<usize>,
    pub t: Option<f64>,
    pub delta: Option<f64>,
    pub delta_log_base: Option<f64>,
    #[serde(default)]
    pub delta_class_only: bool,
    pub suppression_budget: Option<f64>,
    /// Evaluate the whole lattice instead of the pruned walk.
    #[serde(default)]
    pub exhaustive: bool,
    pub candidates: Option<Vec<String>>,
    pub max_set_size: Option<usize>,
    pub anonymized_input: Option<PathBuf>,
    pub group_by: Option<String>,
    pub measure: Option<String>,
    pub output: Option<PathBuf>,
    pub report: Option<PathBuf>,
    pub seed: Option<u64>,
    #[serde(default)]
    pub dp: DpSection,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub field: String,
    pub message: String,
}

impl Diagnostic {
    fn new(field: &str, message: impl Into<String>) -> Self {
        Self {
            field: field.to_string(),
            message: message.into(),
        }
    }
}

impl JobConfig {
    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    /// Reads a config file; relative paths inside it are resolved against
    /// the file's directory.
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let mut cfg = Self::from_json(&text).map_err(|e| format!("{}: {e}", path.display()))?;
        if let Some(dir) = path.parent() {
            cfg.rebase(dir);
        }
        Ok(cfg)
    }

    fn rebase(&mut self, dir: &Path) {
        let fix = |p: &mut Option<PathBuf>| {
            if let Some(path) = p {
                if path.is_relative() {
                    *path = dir.join(&*path);
                }
            }
        };
        fix(&mut self.input);
        fix(&mut self.anonymized_input);
        fix(&mut self.output);
        fix(&mut self.report);
        fix(&mut self.dp.ledger);
    }

    pub fn dataset(&self) -> DatasetConfig {
        DatasetConfig {
            attributes: self.attributes.clone(),
            hierarchies: self.hierarchies.clone(),
        }
    }

    pub fn qid(&self) -> Vec<String> {
        self.qid.clone().unwrap_or_else(|| self.names_with_role(AttributeRole::QuasiIdentifier))
    }

    pub fn sensitive(&self) -> Option<String> {
        self.sensitive
            .clone()
            .or_else(|| self.names_with_role(AttributeRole::Sensitive).into_iter().next())
    }

    fn names_with_role(&self, role: AttributeRole) -> Vec<String> {
        self.attributes
            .iter()
            .filter(|a| a.role == role)
            .map(|a| a.name.clone())
            .collect()
    }

    fn has_attribute(&self, name: &str) -> bool {
        self.attributes.iter().any(|a| a.name == name)
    }
}

/// Everything that would stop `task` from running; empty means runnable.
pub fn validate_config(config: &JobConfig, task: Task) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    if task.is_tabular() {
        validate_dataset(config, task, &mut out);
    }
    match task {
        Task::AnalyzeQid => {
            if config.max_set_size == Some(0) {
                out.push(Diagnostic::new("max_set_size", "max_set_size must be ≥ 1"));
            }
            for name in config.candidates.iter().flatten() {
                if !config.has_attribute(name) {
                    out.push(Diagnostic::new("candidates", format!("unknown attribute {name:?}")));
                }
            }
        }
        Task::Check => {
            if config.k.is_none() && config.l.is_none() && config.t.is_none() && config.delta.is_none() {
                out.push(Diagnostic::new("k", "check needs at least one of k, l, t, delta"));
            }
            validate_models(config, &mut out);
            if let Some(d) = config.delta {
                if !(d > 0.0) {
                    out.push(Diagnostic::new("delta", "delta must be > 0"));
                }
            }
            if let Some(b) = config.delta_log_base {
                if !(b > 1.0) {
                    out.push(Diagnostic::new("delta_log_base", "log base must be > 1"));
                }
            }
        }
        Task::Anonymize => {
            if config.k.is_none() {
                out.push(Diagnostic::new("k", "k is required for anonymize"));
            }
            validate_models(config, &mut out);
            if let Some(b) = config.suppression_budget {
                if !(0.0..=1.0).contains(&b) {
                    out.push(Diagnostic::new("suppression_budget", "suppression_budget must lie in [0, 1]"));
                }
            }
            let declared: BTreeSet<&str> = config.hierarchies.iter().map(HierarchySpec::attribute).collect();
            for attr in config.qid() {
                if !declared.contains(attr.as_str()) {
                    out.push(Diagnostic::new(
                        "hierarchies",
                        format!("hierarchy missing for QID attribute {attr:?}"),
                    ));
                }
            }
            if config.output.is_none() {
                out.push(Diagnostic::new("output", "anonymize needs an output CSV path"));
            }
        }
        Task::Risk => {}
        Task::Utility => {
            if config.anonymized_input.is_none() {
                out.push(Diagnostic::new("anonymized_input", "utility needs the anonymized CSV"));
            }
            for (field, value) in [("group_by", &config.group_by), ("measure", &config.measure)] {
                match value {
                    None => out.push(Diagnostic::new(field, format!("{field} is required for utility"))),
                    Some(name) if !config.has_attribute(name) => {
                        out.push(Diagnostic::new(field, format!("unknown attribute {name:?}")))
                    }
                    Some(_) => {}
                }
            }
            if let Some(g) = &config.group_by {
                if !config.hierarchies.iter().any(|h| h.attribute() == g) {
                    out.push(Diagnostic::new(
                        "hierarchies",
                        format!("hierarchy missing for group_by attribute {g:?}"),
                    ));
                }
            }
        }
        Task::DpRrSimulate => {
            let dp = &config.dp;
            match dp.n {
                None => out.push(Diagnostic::new("dp.n", "n is required")),
                Some(n) => {
                    if dp.true_count.is_some_and(|x| x > n) {
                        out.push(Diagnostic::new("dp.true_count", "true count must not exceed n"));
                    }
                }
            }
            if dp.true_count.is_none() {
                out.push(Diagnostic::new("dp.true_count", "true count is required"));
            }
            match dp.p_honest {
                None => out.push(Diagnostic::new("dp.p_honest", "p_honest is required")),
                Some(p) if !(p > 0.0 && p <= 1.0) => {
                    out.push(Diagnostic::new("dp.p_honest", "p_honest must lie in (0, 1]"))
                }
                Some(_) => {}
            }
        }
        Task::DpBound => {
            match config.dp.epsilon {
                None => out.push(Diagnostic::new("dp.epsilon", "epsilon is required")),
                Some(e) if !(e >= 0.0) => out.push(Diagnostic::new("dp.epsilon", "epsilon must be ≥ 0")),
                Some(_) => {}
            }
            match config.dp.n_values {
                None => out.push(Diagnostic::new("dp.n_values", "n_values is required")),
                Some(n) if n < 2 => out.push(Diagnostic::new("dp.n_values", "n_values must be ≥ 2")),
                Some(_) => {}
            }
        }
        Task::DpLedger => {
            let dp = &config.dp;
            let existing = dp.ledger.as_ref().is_some_and(|p| p.exists());
            if !existing && dp.budget.is_none() && dp.releases.is_some() {
                out.push(Diagnostic::new("dp.budget", "a release count needs a budget"));
            }
            if let Some(b) = dp.budget {
                if !(b > 0.0) || b.is_infinite() {
                    out.push(Diagnostic::new("dp.budget", "budget must be a positive finite ε"));
                }
            }
            if dp.releases == Some(0) {
                out.push(Diagnostic::new("dp.releases", "k must be ≥ 1"));
            }
            if let Some(s) = dp.spend {
                if !(s >= 0.0) {
                    out.push(Diagnostic::new("dp.spend", "spend must be ≥ 0"));
                }
            }
            if dp.spend.is_some() && dp.ledger.is_none() {
                out.push(Diagnostic::new("dp.ledger", "spending needs a ledger file"));
            }
        }
    }
    out
}

fn validate_dataset(config: &JobConfig, task: Task, out: &mut Vec<Diagnostic>) {
    if config.input.is_none() {
        out.push(Diagnostic::new("input", "input CSV path is required"));
    }
    if config.attributes.is_empty() {
        out.push(Diagnostic::new("attributes", "schema has no attributes"));
    }
    if let Err(e) = config.dataset().hierarchies() {
        out.push(Diagnostic::new("hierarchies", e.to_string()));
    }
    let mut seen = BTreeSet::new();
    for a in &config.attributes {
        if !seen.insert(a.name.as_str()) {
            out.push(Diagnostic::new("attributes", format!("duplicate attribute {:?}", a.name)));
        }
    }
    let qid = config.qid();
    if task != Task::AnalyzeQid && qid.is_empty() {
        out.push(Diagnostic::new("qid", "no QID attributes given or declared"));
    }
    for name in &qid {
        if !config.has_attribute(name) {
            out.push(Diagnostic::new("qid", format!("unknown attribute {name:?}")));
        }
    }
    if let Some(s) = &config.sensitive {
        if !config.has_attribute(s) {
            out.push(Diagnostic::new("sensitive", format!("unknown attribute {s:?}")));
        }
    }
}

fn validate_models(config: &JobConfig, out: &mut Vec<Diagnostic>) {
    if config.k == Some(0) {
        out.push(Diagnostic::new("k", "k must be ≥ 1"));
    }
    if config.l == Some(0) {
        out.push(Diagnostic::new("l", "l must be ≥ 1"));
    }
    if let Some(t) = config.t {
        if !(0.0..=1.0).contains(&t) {
            out.push(Diagnostic::new("t", "t must lie in [0, 1]"));
        }
    }
    let needs_sensitive = config.l.is_some() || config.t.is_some() || config.delta.is_some();
    if needs_sensitive && config.sensitive().is_none() {
        out.push(Diagnostic::new("sensitive", "l, t and delta need a sensitive attribute"));
    }
}
