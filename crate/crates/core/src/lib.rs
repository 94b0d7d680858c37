//! Anonymization and disclosure-risk toolkit for tabular microdata.
//!
//! The crate covers the full publication pipeline for a small table:
//! loading CSV under a role-annotated schema, grouping rows into
//! equivalence classes, detecting quasi-identifiers, enforcing
//! k-anonymity (optionally with ℓ-diversity / t-closeness) by searching a
//! generalization lattice, measuring journalist / prosecutor / marketer
//! reidentification risk and query utility, plus a small randomized-response
//! differential-privacy library with ε accounting.
//!
//! Numeric routines that only need field arithmetic are generic over
//! [`Scalar`], so they can run in `f64` or exactly in [`BigRational`].
//! Routines needing `ln`/`exp` are generic over [`Real`].

// Range checks are written `!(x > 0.0)` on purpose so that NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod anonymizer;
pub mod config;
pub mod dp;
pub mod error;
pub mod hierarchy;
pub mod partition;
pub mod privacy;
pub mod pseudonym;
pub mod qid;
pub mod risk;
pub mod scalar;
mod serde_float;
pub mod table;
pub mod utility;

pub use anonymizer::{
    anonymize, anonymize_with, build_lattice, generalize_table, information_loss,
    AnonymizationResult, Constraints, Hierarchies, LatticeNode, SearchStrategy,
};
pub use config::{DatasetConfig, HierarchySpec};
pub use dp::{
    compose_parallel, compose_sequential, epsilon_to_p_honest, ledger_allocate, reid_bound,
    rr_epsilon, rr_estimate_count, rr_respond, simulate_survey, BudgetLedger, CountEstimate, DpParameters,
    LedgerEntry, LedgerMode, RandomizedResponse,
};
pub use error::{Error, Result};
pub use hierarchy::GeneralizationHierarchy;
pub use partition::{partition_by_qid, EquivalenceClass, Partition};
pub use privacy::{
    check_delta_disclosure, check_k_anonymity, check_l_diversity, check_t_closeness,
    homogeneous_classes, DeltaSupport, ModelVerdict, PrivacyModel, SensitiveDistribution,
};
pub use pseudonym::pseudonymize;
pub use qid::{find_minimal_qids, is_qid, QidCheck};
pub use risk::{journalist_risk, marketer_risk, prosecutor_risk, ProsecutorRisk, RiskReport};
pub use scalar::{Real, Scalar};
pub use table::{AttributeKind, AttributeRole, AttributeSchema, Interval, Table, Value};
pub use utility::{mean_normalized_error, normalized_errors, run_group_mean, AggregateResult, GroupError};

pub use num_rational::BigRational;

/// Risk report computed in double precision.
pub type RiskReportF64 = RiskReport<f64>;
/// Risk report computed in single precision.
pub type RiskReportF32 = RiskReport<f32>;
/// Risk report computed with exact rational arithmetic.
pub type ExactRiskReport = RiskReport<BigRational>;

pub type RandomizedResponseF64 = RandomizedResponse<f64>;
pub type RandomizedResponseF32 = RandomizedResponse<f32>;
/// Randomized response with exact rational output probabilities.
pub type ExactRandomizedResponse = RandomizedResponse<BigRational>;

pub type SensitiveDistributionF64 = SensitiveDistribution<f64>;
pub type ExactSensitiveDistribution = SensitiveDistribution<BigRational>;

pub type AggregateResultF64 = AggregateResult<f64>;
