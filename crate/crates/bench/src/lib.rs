//! Benchmark harness for the multilevel solvers: configuration, trace CSV
//! output, a naive projected-gradient oracle and a sampled property suite.

pub mod config;
pub mod oracle;
pub mod report;
pub mod run;
pub mod verify;

pub use config::{ConfigArgs, RunConfig, VariantChoice};
pub use oracle::{oracle_projected_gradient, OracleResult, ORACLE_MAX_DOFS};
pub use report::{trace_csv, write_trace_csv, CSV_HEADER};
pub use run::{run, solve_variant, RunOutcome};
pub use verify::{sample_admissibility, verify, Monitor, MonitorStats, PropertyResult, VerifyReport};

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error(transparent)]
    Solver(#[from] mastr::Error),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("configuration: {0}")]
    Config(String),
}

pub type Result<T, E = BenchError> = std::result::Result<T, E>;
