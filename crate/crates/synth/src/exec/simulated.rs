//! In-process stand-in for the shim. Programs carry `# genplan-sim:`
//! directive comments saying what `get_plan` does; the last directive in the
//! file wins, the way a later definition of `get_plan` replaces an earlier one.
//!
//! Directives:
//! - `oracle`: the oracle plan for the task
//! - `empty`: `[]`
//! - `plan <json list>`: that list, verbatim
//! - `return <json>`: any JSON value, e.g. `return 3`
//! - `unparenthesized`: the oracle plan without the outer parentheses
//! - `drop-first` / `drop-last`: the oracle plan minus one action
//! - `limit <n>`: the oracle plan on tasks with at most n objects, an
//!   exception otherwise
//! - `raise <Type: message>`: an exception raised at the directive's line
//! - `timeout`: a spin that hits the budget

use std::sync::Arc;
use std::time::{Duration, Instant};

use genplan_core::{Domain, Plan, RawPlanOutput, Task};

use super::wire::raw_from_value;
use super::{ExecError, ExecutionOutcome, Executor, OutcomeKind};
use crate::program::ProgramSource;

pub const SIM_DIRECTIVE: &str = "# genplan-sim:";

pub type OracleFn = Arc<dyn Fn(&Task) -> Option<Plan> + Send + Sync>;

#[derive(Clone)]
pub struct SimulatedExecutor {
    oracle: OracleFn,
}

fn traceback(line: usize, last: &str) -> String {
    format!("Traceback (most recent call last):\n  File \"program.py\", line {line}, in get_plan\n{last}")
}

impl SimulatedExecutor {
    pub fn new(oracle: OracleFn) -> Self {
        SimulatedExecutor { oracle }
    }

    fn oracle_strings(&self, task: &Task, line: usize) -> Result<Vec<String>, OutcomeKind> {
        match (self.oracle)(task) {
            Some(plan) => Ok(plan.iter().map(ToString::to_string).collect()),
            None => Err(OutcomeKind::Raised {
                traceback: traceback(line, "RuntimeError: oracle has no plan for this task"),
            }),
        }
    }

    fn run(&self, program: &ProgramSource, task: &Task) -> OutcomeKind {
        let Some((line, directive)) = program
            .text
            .lines()
            .enumerate()
            .filter_map(|(i, l)| l.trim_start().strip_prefix(SIM_DIRECTIVE).map(|d| (i + 1, d.trim())))
            .last()
        else {
            return OutcomeKind::Raised {
                traceback: "Traceback (most recent call last):\n  File \"shim.py\", line 1, in <module>\nNameError: name 'get_plan' is not defined".into(),
            };
        };
        let (verb, rest) = directive.split_once(char::is_whitespace).unwrap_or((directive, ""));
        let rest = rest.trim();
        let returned = |strings: Vec<String>| OutcomeKind::Returned(RawPlanOutput::Strings(strings));
        let from_oracle = |edit: fn(Vec<String>) -> Vec<String>| match self.oracle_strings(task, line) {
            Ok(strings) => returned(edit(strings)),
            Err(kind) => kind,
        };
        match verb {
            "oracle" => from_oracle(|s| s),
            "empty" => returned(Vec::new()),
            "unparenthesized" => from_oracle(|s| {
                s.into_iter()
                    .map(|a| a.trim_start_matches('(').trim_end_matches(')').to_owned())
                    .collect()
            }),
            "drop-first" => from_oracle(|s| s.into_iter().skip(1).collect()),
            "drop-last" => from_oracle(|mut s| {
                s.pop();
                s
            }),
            "limit" => match rest.parse::<usize>() {
                Ok(n) if task.objects.len() <= n => from_oracle(|s| s),
                Ok(_) => OutcomeKind::Raised {
                    traceback: traceback(line, "RuntimeError: too many objects"),
                },
                Err(_) => OutcomeKind::Raised {
                    traceback: traceback(line, &format!("ValueError: bad limit {rest:?}")),
                },
            },
            "plan" | "return" => match serde_json::from_str::<serde_json::Value>(rest) {
                Ok(value) => OutcomeKind::Returned(raw_from_value(&value)),
                Err(e) => OutcomeKind::Raised {
                    traceback: traceback(line, &format!("SyntaxError: {e}")),
                },
            },
            "raise" => OutcomeKind::Raised {
                traceback: traceback(line, if rest.is_empty() { "Exception" } else { rest }),
            },
            "timeout" => OutcomeKind::TimedOut {
                traceback: traceback(line, "KeyboardInterrupt"),
            },
            other => OutcomeKind::Raised {
                traceback: traceback(line, &format!("ValueError: unknown simulation directive {other:?}")),
            },
        }
    }
}

impl Executor for SimulatedExecutor {
    fn execute(
        &self,
        program: &ProgramSource,
        _domain: &Domain,
        task: &Task,
        budget: Duration,
    ) -> Result<ExecutionOutcome, ExecError> {
        if program.is_empty() {
            return Err(ExecError::EmptyProgram);
        }
        let start = Instant::now();
        let kind = self.run(program, task);
        let elapsed = start.elapsed();
        // A simulated spin costs nothing but is reported as using the budget.
        let wall_time = if matches!(kind, OutcomeKind::TimedOut { .. }) { budget } else { elapsed };
        Ok(ExecutionOutcome {
            kind,
            wall_time,
            plan_time: Some(wall_time),
        })
    }
}
