//! Running a synthesized program on one task.

use std::time::Duration;

use genplan_core::{Domain, RawPlanOutput, Task};
use thiserror::Error;

use crate::program::ProgramSource;

mod process;
mod simulated;
pub mod wire;

pub use process::ProcessExecutor;
pub use simulated::{OracleFn, SimulatedExecutor, SIM_DIRECTIVE};

pub const DEFAULT_BUDGET: Duration = Duration::from_secs(30);

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OutcomeKind {
    Returned(RawPlanOutput),
    Raised { traceback: String },
    TimedOut { traceback: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExecutionOutcome {
    pub kind: OutcomeKind,
    /// Wall time of the whole call, including process start-up.
    pub wall_time: Duration,
    /// Time inside `get_plan` alone, when the runner measured it.
    pub plan_time: Option<Duration>,
}

#[derive(Debug, Error)]
pub enum ExecError {
    #[error("program is empty")]
    EmptyProgram,
    #[error("could not start executor: {0}")]
    Spawn(#[from] std::io::Error),
    #[error("executor protocol violation: {message}")]
    Protocol { message: String, stdout: String },
}

pub trait Executor: Send + Sync {
    fn execute(
        &self,
        program: &ProgramSource,
        domain: &Domain,
        task: &Task,
        budget: Duration,
    ) -> Result<ExecutionOutcome, ExecError>;
}
