//! Randomized response, ε calculus and privacy-budget accounting.
//!
//! All randomness comes from caller-supplied seeds.

mod accounting;
mod randomized_response;

pub use accounting::{
    compose_parallel, compose_sequential, ledger_allocate, reid_bound, BudgetLedger, DpParameters,
    LedgerEntry, LedgerMode,
};
pub use randomized_response::{
    epsilon_to_p_honest, rr_epsilon, rr_estimate_count, rr_respond, simulate_survey, CountEstimate,
    RandomizedResponse,
};
