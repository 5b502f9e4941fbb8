//! Experiment runner for LLM-synthesized generalized planners: task
//! generation, synthesis and baselines per (domain, seed, approach) cell,
//! metrics, and runtime benchmarks.

pub mod bench;
pub mod config;
pub mod experiment;
pub mod metrics;
pub mod records;
pub mod tasks;

use std::path::PathBuf;

use thiserror::Error;

pub use config::{Approach, ExecMode, ExecutorConfig, ExperimentConfig};
pub use experiment::{run_cell, run_experiment, synthesize_all, Cell, Layout};
pub use metrics::{compute_metrics, write_report, MetricsTable};
pub use records::{load_records, ReportRecord};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{path}: {source}", path = .0.display(), source = .1)]
    Io(PathBuf, #[source] std::io::Error),
    #[error(transparent)]
    Pddl(#[from] genplan_core::PddlError),
    #[error(transparent)]
    Gen(#[from] genplan_domains::GenError),
    #[error(transparent)]
    Llm(#[from] genplan_synth::LlmError),
    #[error(transparent)]
    Exec(#[from] genplan_synth::ExecError),
    #[error("{0}")]
    Session(String),
}
