//! Library half of the `anonkit` binary: job configs, validation and the
//! task runners, so they can be driven from tests without a subprocess.

// Range checks are written `!(x > 0.0)` on purpose so that NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod job;
pub mod run;

pub use job::{validate_config, Diagnostic, DpSection, JobConfig, Task, CONFIG_DIR_ENV};
pub use run::{run_job, JobError, JobOutcome, EXIT_INPUT, EXIT_OK, EXIT_REFUSED};
