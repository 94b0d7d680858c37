//! Executes one validated job and renders its JSON report.

use std::collections::BTreeMap;
use std::path::Path;

use anonkit::table::published_schema;
use anonkit::{
    anonymize_with, check_delta_disclosure, check_k_anonymity, check_l_diversity, check_t_closeness,
    find_minimal_qids, homogeneous_classes, is_qid, ledger_allocate, mean_normalized_error,
    normalized_errors, partition_by_qid, reid_bound, rr_epsilon, rr_estimate_count, run_group_mean,
    AttributeRole, BigRational, BudgetLedger, Constraints, DeltaSupport, DpParameters, Error,
    ExactRiskReport, Partition, RandomizedResponseF64, SearchStrategy, Table,
};
use serde::Serialize;
use serde_json::{json, Value as Json};

use crate::job::{validate_config, Diagnostic, JobConfig, Task};

/// Exit status for success.
pub const EXIT_OK: i32 = 0;
/// Exit status for unreadable input or an invalid config.
pub const EXIT_INPUT: i32 = 1;
/// Exit status for infeasible constraints, failed checks and refused spends.
pub const EXIT_REFUSED: i32 = 2;

/// A finished job: its report, and a diagnostic when the exit status is
/// non-zero but a report was still produced (failed `check`).
#[derive(Debug, Clone)]
pub struct JobOutcome {
    pub exit_code: i32,
    pub report: String,
    pub diagnostic: Option<String>,
}

/// A job that stopped before producing a report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JobError {
    #[serde(skip)]
    pub exit_code: i32,
    pub code: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<Diagnostic>,
}

impl JobError {
    fn new(exit_code: i32, code: &'static str, message: impl Into<String>) -> Self {
        Self {
            exit_code,
            code,
            message: message.into(),
            diagnostics: Vec::new(),
        }
    }

    pub fn to_json(&self) -> String {
        render(self)
    }
}

impl From<Error> for JobError {
    fn from(e: Error) -> Self {
        let (exit, code) = match &e {
            Error::Csv(_)
            | Error::Io(_)
            | Error::HeaderMismatch { .. }
            | Error::RowArity { .. }
            | Error::ParseCell { .. }
            | Error::UnmappedValue { .. }
            | Error::NonNumeric { .. }
            | Error::EmptyTable
            | Error::EmptyPartition => (EXIT_INPUT, "input_error"),
            Error::Json(_)
            | Error::UnknownAttribute(_)
            | Error::DuplicateAttribute(_)
            | Error::InvalidHierarchy { .. }
            | Error::LevelOutOfRange { .. }
            | Error::OutsideDomain { .. }
            | Error::InvalidParameter(_) => (EXIT_INPUT, "invalid_config"),
            Error::ZeroNormalization { .. } | Error::UnmatchedGroup { .. } | Error::AmbiguousGroup { .. } => {
                (EXIT_INPUT, "utility_undefined")
            }
            Error::NoFeasibleNode { .. } => (EXIT_REFUSED, "infeasible"),
            Error::BudgetExceeded { .. } | Error::ReleaseLimit { .. } => (EXIT_REFUSED, "budget_refused"),
        };
        JobError::new(exit, code, e.to_string())
    }
}

type JobResult<T> = Result<T, JobError>;

fn render<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

/// JSON number, or a string for ±∞ / NaN.
fn num(x: f64) -> Json {
    if x.is_finite() {
        json!(x)
    } else if x.is_nan() {
        json!("NaN")
    } else if x > 0.0 {
        json!("Infinity")
    } else {
        json!("-Infinity")
    }
}

fn read(path: &Path) -> JobResult<Vec<u8>> {
    std::fs::read(path).map_err(|e| JobError::new(EXIT_INPUT, "input_unreadable", format!("{}: {e}", path.display())))
}

fn write(path: &Path, bytes: &[u8]) -> JobResult<()> {
    std::fs::write(path, bytes).map_err(|e| JobError::new(EXIT_INPUT, "output_unwritable", format!("{}: {e}", path.display())))
}

/// Validates, runs, and writes every output file of `task`. The report is
/// also written to `config.report` when set.
pub fn run_job(config: &JobConfig, task: Task) -> JobResult<JobOutcome> {
    let diagnostics = validate_config(config, task);
    if !diagnostics.is_empty() {
        let mut err = JobError::new(EXIT_INPUT, "invalid_config", format!("{} problem(s) in job config", diagnostics.len()));
        err.diagnostics = diagnostics;
        return Err(err);
    }
    let (report, failed) = match task {
        Task::AnalyzeQid => (analyze_qid(config)?, None),
        Task::Check => check(config)?,
        Task::Anonymize => (anonymize(config)?, None),
        Task::Risk => (risk(config)?, None),
        Task::Utility => (utility(config)?, None),
        Task::DpRrSimulate => (rr_simulate(config)?, None),
        Task::DpBound => (bound(config)?, None),
        Task::DpLedger => (ledger(config)?, None),
    };
    let report = render(&report);
    if let Some(path) = &config.report {
        write(path, report.as_bytes())?;
    }
    Ok(JobOutcome {
        exit_code: if failed.is_some() { EXIT_REFUSED } else { EXIT_OK },
        report,
        diagnostic: failed.map(|d| render(&d)),
    })
}

fn load_input(config: &JobConfig) -> JobResult<Table> {
    let path = config.input.as_deref().expect("validated");
    Ok(config.dataset().load_table(&read(path)?)?)
}

fn analyze_qid(config: &JobConfig) -> JobResult<Json> {
    let table = load_input(config)?;
    let candidates = config.candidates.clone().unwrap_or_else(|| {
        config
            .attributes
            .iter()
            .filter(|a| a.role != AttributeRole::Identifier)
            .map(|a| a.name.clone())
            .collect()
    });
    let max = config.max_set_size.unwrap_or(anonkit::qid::DEFAULT_MAX_SET_SIZE);
    let minimal = find_minimal_qids(&table, &candidates, max)?;
    let qid = config.qid();
    let declared = if qid.is_empty() { None } else { Some(is_qid(&table, &qid)?) };
    Ok(json!({
        "task": Task::AnalyzeQid,
        "rows": table.row_count(),
        "candidates": candidates,
        "max_set_size": max,
        "minimal_qids": minimal,
        "declared_qid": declared.map(|c| json!({
            "attributes": qid,
            "is_qid": c.is_qid,
            "witnesses": c.witnesses,
        })),
    }))
}

fn check(config: &JobConfig) -> JobResult<(Json, Option<Json>)> {
    let table = load_input(config)?;
    let qid = config.qid();
    let partition = partition_by_qid(&table, &qid)?;
    let sensitive = config.sensitive();
    let mut verdicts = Vec::new();
    if let Some(k) = config.k {
        verdicts.push(check_k_anonymity(&partition, k));
    }
    if let (Some(l), Some(s)) = (config.l, &sensitive) {
        verdicts.push(check_l_diversity(&table, &partition, s, l)?);
    }
    if let (Some(t), Some(s)) = (config.t, &sensitive) {
        verdicts.push(check_t_closeness(&table, &partition, s, t)?);
    }
    if let (Some(d), Some(s)) = (config.delta, &sensitive) {
        let support = if config.delta_class_only {
            DeltaSupport::ClassOnly
        } else {
            DeltaSupport::Global
        };
        verdicts.push(check_delta_disclosure(&table, &partition, s, d, config.delta_log_base.unwrap_or(10.0), support)?);
    }
    let homogeneous = match &sensitive {
        Some(s) => homogeneous_classes(&table, &partition, s)?
            .into_iter()
            .map(|c| c.qid_values.clone())
            .collect(),
        None => Vec::new(),
    };
    let satisfied = verdicts.iter().all(|v| v.satisfied);
    let report = json!({
        "task": Task::Check,
        "qid": qid,
        "sensitive": sensitive,
        "rows": table.row_count(),
        "classes": partition.classes.len(),
        "satisfied": satisfied,
        "verdicts": verdicts,
        "homogeneous_classes": homogeneous,
    });
    let failed = (!satisfied).then(|| {
        json!({
            "code": "constraint_violation",
            "message": "one or more privacy models are not satisfied",
            "violations": verdicts.iter().filter(|v| !v.satisfied).map(|v| json!({
                "model": v.model,
                "threshold": v.threshold,
                "violating_classes": v.violating_classes,
            })).collect::<Vec<_>>(),
        })
    });
    Ok((report, failed))
}

fn risk_json(partition: &Partition) -> JobResult<Json> {
    let exact = ExactRiskReport::assess(partition)?;
    let show = |r: &BigRational| r.to_string();
    let mut report = serde_json::to_value(exact.to_f64()).expect("risk report serializes");
    report["exact"] = json!({
        "prosecutor_max": show(&exact.prosecutor_max),
        "journalist": show(&exact.journalist),
        "marketer": show(&exact.marketer),
    });
    Ok(report)
}

fn anonymize(config: &JobConfig) -> JobResult<Json> {
    let table = load_input(config)?;
    let hierarchies = config.dataset().hierarchies()?;
    let qid = config.qid();
    let mut constraints = Constraints::k_anonymity(config.k.expect("validated"));
    if let Some(l) = config.l {
        constraints = constraints.with_l_diversity(config.sensitive().expect("validated"), l);
    }
    if let Some(t) = config.t {
        constraints = constraints.with_t_closeness(config.sensitive().expect("validated"), t);
    }
    let budget = config.suppression_budget.unwrap_or(0.0);
    let strategy = if config.exhaustive {
        SearchStrategy::Exhaustive
    } else {
        SearchStrategy::Pruned
    };
    let result = anonymize_with(&table, &qid, &hierarchies, &constraints, budget, strategy)?;

    write(config.output.as_deref().expect("validated"), &result.output_table.to_csv()?)?;
    let partition = partition_by_qid(&result.output_table, &qid)?;
    Ok(json!({
        "task": Task::Anonymize,
        "qid": qid,
        "constraints": constraints,
        "suppression_budget": budget,
        "strategy": if config.exhaustive { "exhaustive" } else { "pruned" },
        "rows_in": table.row_count(),
        "rows_out": result.output_table.row_count(),
        "node": result.chosen_node,
        "loss": result.loss,
        "suppressed_row_indices": result.suppressed_row_indices,
        "verdicts": result.verdicts,
        "risk": risk_json(&partition)?,
        "nodes_evaluated": result.nodes_evaluated,
    }))
}

fn risk(config: &JobConfig) -> JobResult<Json> {
    let table = load_input(config)?;
    let qid = config.qid();
    let partition = partition_by_qid(&table, &qid)?;
    Ok(json!({
        "task": Task::Risk,
        "qid": qid,
        "rows": table.row_count(),
        "classes": partition.classes.len(),
        "risk": risk_json(&partition)?,
    }))
}

fn utility(config: &JobConfig) -> JobResult<Json> {
    let original = load_input(config)?;
    let published = Table::from_csv(
        &read(config.anonymized_input.as_deref().expect("validated"))?,
        published_schema(&config.attributes),
    )?;
    let group_by = config.group_by.as_deref().expect("validated");
    let measure = config.measure.as_deref().expect("validated");
    let hierarchies = config.dataset().hierarchies()?;
    let hierarchy = &hierarchies[group_by];
    let q = run_group_mean::<f64>(&original, group_by, measure)?;
    let q_anon = run_group_mean::<f64>(&published, group_by, measure)?;
    let per_group = normalized_errors(&q, &q_anon, hierarchy)?;
    let m = mean_normalized_error(&q, &q_anon, hierarchy)?;
    Ok(json!({
        "task": Task::Utility,
        "query": {"aggregate": "mean", "group_by": group_by, "measure": measure},
        "original": q,
        "anonymized": q_anon,
        "per_group": per_group,
        "mean_normalized_error": m,
    }))
}

fn rr_simulate(config: &JobConfig) -> JobResult<Json> {
    let dp = &config.dp;
    let (n, true_count, p) = (
        dp.n.expect("validated"),
        dp.true_count.expect("validated"),
        dp.p_honest.expect("validated"),
    );
    let seed = config.seed.unwrap_or(0);
    let mech = RandomizedResponseF64::binary(p)?;
    let observed = anonkit::dp::simulate_survey(n, true_count, &mech, seed)?;
    let estimate = rr_estimate_count(observed, n, &mech)?;
    Ok(json!({
        "task": Task::DpRrSimulate,
        "n": n,
        "true_count": true_count,
        "p_honest": p,
        "seed": seed,
        "epsilon": num(rr_epsilon(&mech)),
        "truth_probability": mech.output_probability(1, 1),
        "observed_true": observed,
        "estimate": {"raw": estimate.raw, "clamped": estimate.clamped},
    }))
}

fn bound(config: &JobConfig) -> JobResult<Json> {
    let eps = config.dp.epsilon.expect("validated");
    let n = config.dp.n_values.expect("validated");
    Ok(json!({
        "task": Task::DpBound,
        "epsilon": num(eps),
        "n_values": n,
        "bound": reid_bound(eps, n)?,
    }))
}

fn ledger(config: &JobConfig) -> JobResult<Json> {
    let dp = &config.dp;
    let existing = match &dp.ledger {
        Some(path) if path.exists() => {
            let text = String::from_utf8(read(path)?)
                .map_err(|e| JobError::new(EXIT_INPUT, "input_error", format!("{}: {e}", path.display())))?;
            Some(BudgetLedger::from_json(&text)?)
        }
        _ => None,
    };
    let mut per_release = None;
    let mut ledger = match existing {
        Some(ledger) => {
            if dp.budget.is_some() && dp.budget != ledger.budget {
                return Err(JobError::new(
                    EXIT_INPUT,
                    "invalid_config",
                    "ledger file already records a different budget",
                ));
            }
            if let (Some(b), Some(k)) = (ledger.budget, ledger.max_releases) {
                per_release = Some(b / k as f64);
            }
            ledger
        }
        None => match (dp.budget, dp.releases) {
            (Some(b), Some(k)) => {
                let (eps, ledger) = ledger_allocate(b, k)?;
                per_release = Some(eps);
                ledger
            }
            (Some(b), None) => BudgetLedger::budgeted(b, None)?,
            (None, _) => BudgetLedger::accumulating(),
        },
    };
    if let Some(eps) = dp.spend {
        let label = dp.label.clone().unwrap_or_else(|| format!("release-{}", ledger.entries.len() + 1));
        let tag = dp.dataset_tag.clone().unwrap_or_else(|| "default".to_string());
        ledger.spend(label, DpParameters::new(eps, dp.spend_delta.unwrap_or(0.0))?, tag)?;
    }
    if let Some(path) = &dp.ledger {
        let mut text = ledger.to_json()?;
        text.push('\n');
        write(path, text.as_bytes())?;
    }
    let by_tag: BTreeMap<&str, f64> = ledger
        .entries
        .iter()
        .map(|e| (e.dataset_tag.as_str(), ledger.spent_on(&e.dataset_tag)))
        .collect();
    Ok(json!({
        "task": Task::DpLedger,
        "ledger": ledger,
        "per_release_epsilon": per_release,
        "total_epsilon": ledger.total_epsilon(),
        "total_delta": ledger.total_delta(),
        "spent_by_dataset": by_tag,
        "remaining": ledger.remaining(),
    }))
}
