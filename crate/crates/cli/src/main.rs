use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anonkit_cli::{run_job, JobConfig, JobError, Task, CONFIG_DIR_ENV, EXIT_INPUT};
use clap::{Args, Parser, Subcommand};

/// Anonymize tabular microdata and quantify reidentification risk.
#[derive(Parser)]
#[command(name = "anonkit", version)]
struct Cli {
    /// JSON job config; flags override its fields. Relative paths are
    /// resolved against $ANONKIT_CONFIG_DIR when it is set.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct DataArgs {
    /// Input CSV
    #[arg(long)]
    input: Option<PathBuf>,
    /// Comma-separated quasi-identifier attributes
    #[arg(long, value_delimiter = ',')]
    qid: Option<Vec<String>>,
    #[arg(long)]
    sensitive: Option<String>,
    /// Write the JSON report here instead of stdout
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Find minimal quasi-identifiers
    AnalyzeQid {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, value_delimiter = ',')]
        candidates: Option<Vec<String>>,
        #[arg(long)]
        max_set_size: Option<usize>,
    },
    /// Check k-anonymity, ℓ-diversity, t-closeness and δ-disclosure
    Check {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        l: Option<usize>,
        #[arg(long)]
        t: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        log_base: Option<f64>,
        /// Only inspect sensitive values present in each class
        #[arg(long)]
        class_only_delta: bool,
    },
    /// Generalize and suppress until the constraints hold
    Anonymize {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        l: Option<usize>,
        #[arg(long)]
        t: Option<f64>,
        /// Fraction of rows that may be suppressed
        #[arg(long)]
        budget: Option<f64>,
        /// Anonymized CSV destination
        #[arg(long)]
        output: Option<PathBuf>,
        /// Evaluate every lattice node
        #[arg(long)]
        exhaustive: bool,
    },
    /// Journalist, prosecutor and marketer risk
    Risk {
        #[command(flatten)]
        data: DataArgs,
    },
    /// Mean normalized error of a grouped mean
    Utility {
        #[command(flatten)]
        data: DataArgs,
        /// Anonymized CSV to compare against the input
        #[arg(long)]
        anonymized: Option<PathBuf>,
        #[arg(long)]
        group_by: Option<String>,
        #[arg(long)]
        measure: Option<String>,
    },
    /// Differential-privacy tools
    #[command(subcommand)]
    Dp(DpCommand),
}

#[derive(Subcommand)]
enum DpCommand {
    /// Simulate a binary randomized-response survey and estimate the count
    RrSimulate {
        #[arg(long)]
        n: Option<u64>,
        #[arg(long)]
        true_count: Option<u64>,
        #[arg(long)]
        p_honest: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Upper bound on reidentification probability under ε-DP
    Bound {
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        n_values: Option<u64>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Create, inspect or spend from a privacy-budget ledger
    Ledger {
        /// Total ε
        #[arg(long)]
        budget: Option<f64>,
        /// Planned number of releases
        #[arg(long)]
        k: Option<usize>,
        /// Ledger JSON file; created if missing
        #[arg(long)]
        file: Option<PathBuf>,
        /// Record a release of this ε
        #[arg(long)]
        spend: Option<f64>,
        #[arg(long)]
        spend_delta: Option<f64>,
        #[arg(long)]
        label: Option<String>,
        #[arg(long)]
        tag: Option<String>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

fn set<T>(slot: &mut Option<T>, flag: Option<T>) {
    if flag.is_some() {
        *slot = flag;
    }
}

impl DataArgs {
    fn apply(self, cfg: &mut JobConfig) {
        set(&mut cfg.input, self.input);
        set(&mut cfg.qid, self.qid);
        set(&mut cfg.sensitive, self.sensitive);
        set(&mut cfg.report, self.report);
    }
}

/// Folds the subcommand's flags into `cfg` and names the task.
fn apply(command: Command, cfg: &mut JobConfig) -> Task {
    match command {
        Command::AnalyzeQid { data, candidates, max_set_size } => {
            data.apply(cfg);
            set(&mut cfg.candidates, candidates);
            set(&mut cfg.max_set_size, max_set_size);
            Task::AnalyzeQid
        }
        Command::Check { data, k, l, t, delta, log_base, class_only_delta } => {
            data.apply(cfg);
            set(&mut cfg.k, k);
            set(&mut cfg.l, l);
            set(&mut cfg.t, t);
            set(&mut cfg.delta, delta);
            set(&mut cfg.delta_log_base, log_base);
            cfg.delta_class_only |= class_only_delta;
            Task::Check
        }
        Command::Anonymize { data, k, l, t, budget, output, exhaustive } => {
            data.apply(cfg);
            set(&mut cfg.k, k);
            set(&mut cfg.l, l);
            set(&mut cfg.t, t);
            set(&mut cfg.suppression_budget, budget);
            set(&mut cfg.output, output);
            cfg.exhaustive |= exhaustive;
            Task::Anonymize
        }
        Command::Risk { data } => {
            data.apply(cfg);
            Task::Risk
        }
        Command::Utility { data, anonymized, group_by, measure } => {
            data.apply(cfg);
            set(&mut cfg.anonymized_input, anonymized);
            set(&mut cfg.group_by, group_by);
            set(&mut cfg.measure, measure);
            Task::Utility
        }
        Command::Dp(DpCommand::RrSimulate { n, true_count, p_honest, seed, report }) => {
            set(&mut cfg.dp.n, n);
            set(&mut cfg.dp.true_count, true_count);
            set(&mut cfg.dp.p_honest, p_honest);
            set(&mut cfg.seed, seed);
            set(&mut cfg.report, report);
            Task::DpRrSimulate
        }
        Command::Dp(DpCommand::Bound { epsilon, n_values, report }) => {
            set(&mut cfg.dp.epsilon, epsilon);
            set(&mut cfg.dp.n_values, n_values);
            set(&mut cfg.report, report);
            Task::DpBound
        }
        Command::Dp(DpCommand::Ledger { budget, k, file, spend, spend_delta, label, tag, report }) => {
            set(&mut cfg.dp.budget, budget);
            set(&mut cfg.dp.releases, k);
            set(&mut cfg.dp.ledger, file);
            set(&mut cfg.dp.spend, spend);
            set(&mut cfg.dp.spend_delta, spend_delta);
            set(&mut cfg.dp.label, label);
            set(&mut cfg.dp.dataset_tag, tag);
            set(&mut cfg.report, report);
            Task::DpLedger
        }
    }
}

fn load_config(path: Option<PathBuf>) -> Result<JobConfig, JobError> {
    let Some(mut path) = path else {
        return Ok(JobConfig::default());
    };
    if path.is_relative() {
        if let Some(dir) = std::env::var_os(CONFIG_DIR_ENV) {
            path = PathBuf::from(dir).join(path);
        }
    }
    JobConfig::load(&path).map_err(|message| JobError {
        exit_code: EXIT_INPUT,
        code: "invalid_config",
        message,
        diagnostics: Vec::new(),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = load_config(cli.config).and_then(|mut cfg| {
        let task = apply(cli.command, &mut cfg);
        run_job(&cfg, task).map(|o| (o, cfg.report.is_none()))
    });
    match outcome {
        Ok((o, to_stdout)) => {
            if to_stdout {
                let _ = std::io::stdout().write_all(o.report.as_bytes());
            }
            if let Some(d) = o.diagnostic {
                let _ = std::io::stderr().write_all(d.as_bytes());
            }
            ExitCode::from(o.exit_code as u8)
        }
        Err(e) => {
            let _ = std::io::stderr().write_all(e.to_json().as_bytes());
            ExitCode::from(e.exit_code as u8)
        }
    }
}
