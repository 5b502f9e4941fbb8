//! The synthesis session: initial prompts, then validate on training tasks
//! and re-prompt with feedback until every task passes or rounds run out.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::time::Duration;

use genplan_core::{check_syntax, validate, Domain, Plan, RawPlanOutput, SyntaxReport, Task};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::{ExecError, ExecutionOutcome, Executor, OutcomeKind};
use crate::llm::{query, ChatProvider, LlmError, Transcript};
use crate::program::{accumulate, ProgramSource};
use crate::prompt::{
    build_feedback_prompt, build_stage_prompts, AbbreviationConfig, FeedbackConfig, FeedbackDetail, FeedbackKind,
    PromptMode,
};

const MISSING_GET_PLAN: &str = "Traceback (most recent call last):\n  File \"shim.py\", line 1, in <module>\nNameError: name 'get_plan' is not defined";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthesisConfig {
    pub max_debug_rounds: usize,
    pub exec_budget_s: f64,
    pub mode: PromptMode,
    pub debug_enabled: bool,
    /// After a fix, re-check from the first training task rather than from
    /// the one that failed.
    pub restart_at_first: bool,
    pub abbreviation: AbbreviationConfig,
    pub feedback: FeedbackConfig,
}

impl Default for SynthesisConfig {
    fn default() -> Self {
        SynthesisConfig {
            max_debug_rounds: 4,
            exec_budget_s: 30.0,
            mode: PromptMode::Cot,
            debug_enabled: true,
            restart_at_first: true,
            abbreviation: AbbreviationConfig::default(),
            feedback: FeedbackConfig::default(),
        }
    }
}

impl SynthesisConfig {
    pub fn budget(&self) -> Duration {
        Duration::from_secs_f64(self.exec_budget_s.max(0.0))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorRecord {
    /// Response round that produced the failing program; 0 is the first
    /// implementation.
    pub round: usize,
    pub task: String,
    pub kind: FeedbackKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesisSession {
    pub transcript: Transcript,
    pub program: ProgramSource,
    pub rounds_used: usize,
    /// Failures that were fed back, one per round.
    pub error_history: Vec<ErrorRecord>,
    /// The failure left when rounds ran out or debugging was off.
    pub final_failure: Option<ErrorRecord>,
    /// Tasks that appeared in a prompt or produced feedback.
    pub tasks_used: BTreeSet<String>,
    /// Whether the final program passed every training task.
    pub validated: bool,
}

/// The parts of a session kept next to its transcript.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionState {
    pub session_id: String,
    pub program: ProgramSource,
    pub rounds_used: usize,
    pub error_history: Vec<ErrorRecord>,
    pub final_failure: Option<ErrorRecord>,
    pub tasks_used: BTreeSet<String>,
    pub validated: bool,
}

impl SynthesisSession {
    pub fn state(&self) -> SessionState {
        SessionState {
            session_id: self.transcript.session_id.clone(),
            program: self.program.clone(),
            rounds_used: self.rounds_used,
            error_history: self.error_history.clone(),
            final_failure: self.final_failure.clone(),
            tasks_used: self.tasks_used.clone(),
            validated: self.validated,
        }
    }

    /// Every error met, fed back or not.
    pub fn errors(&self) -> impl Iterator<Item = &ErrorRecord> {
        self.error_history.iter().chain(self.final_failure.iter())
    }

    /// Write `<dir>/<stem>.json` and `<dir>/<stem>.state.json`.
    pub fn persist(&self, dir: &Path, stem: &str) -> Result<(), LlmError> {
        self.transcript.persist(&dir.join(format!("{stem}.json")))?;
        let mut text = serde_json::to_string_pretty(&self.state()).expect("state serializes");
        text.push('\n');
        fs::write(dir.join(format!("{stem}.state.json")), text)?;
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum SessionFailure {
    #[error(transparent)]
    Llm(#[from] LlmError),
    #[error(transparent)]
    Exec(#[from] ExecError),
}

/// A session stopped by a provider or executor error. The partial session is
/// kept so it can be saved and resumed by replaying its transcript.
#[derive(Debug, Error)]
#[error("synthesis stopped after {} round(s): {source}", session.rounds_used)]
pub struct SessionError {
    pub session: Box<SynthesisSession>,
    #[source]
    pub source: SessionFailure,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Solved(Plan),
    Failed(FeedbackDetail),
}

/// Map an execution outcome to success or the feedback it calls for.
pub fn classify(outcome: &ExecutionOutcome, domain: &Domain, task: &Task) -> Verdict {
    let raw = match &outcome.kind {
        OutcomeKind::Raised { traceback } => {
            return Verdict::Failed(FeedbackDetail::Exception {
                traceback: traceback.clone(),
            })
        }
        OutcomeKind::TimedOut { traceback } => {
            return Verdict::Failed(FeedbackDetail::Timeout {
                traceback: traceback.clone(),
            })
        }
        OutcomeKind::Returned(raw) => raw,
    };
    let plan = match check_syntax(raw, domain, task) {
        SyntaxReport::Ok(plan) => plan,
        SyntaxReport::Violation(violation) => {
            return Verdict::Failed(FeedbackDetail::Syntax {
                raw: raw.clone(),
                violation,
            })
        }
    };
    let result = validate(&plan, domain, task);
    if result.is_valid() {
        return Verdict::Solved(plan);
    }
    let strings = match raw {
        RawPlanOutput::Strings(s) => s.clone(),
        RawPlanOutput::Malformed { .. } => unreachable!("syntax check passed"),
    };
    Verdict::Failed(FeedbackDetail::Semantics { plan: strings, result })
}

fn run_task(
    program: &ProgramSource,
    domain: &Domain,
    task: &Task,
    executor: &dyn Executor,
    budget: Duration,
) -> Result<(Verdict, Option<ExecutionOutcome>), ExecError> {
    if program.is_empty() {
        let detail = FeedbackDetail::Exception {
            traceback: MISSING_GET_PLAN.into(),
        };
        return Ok((Verdict::Failed(detail), None));
    }
    let outcome = executor.execute(program, domain, task, budget)?;
    Ok((classify(&outcome, domain, task), Some(outcome)))
}

/// Run a full session. `training` is in validation order; the first
/// `cfg.abbreviation.tasks_in_prompt` tasks go into the initial prompt.
pub fn synthesize(
    session_id: &str,
    domain: &Domain,
    training: &[Task],
    cfg: &SynthesisConfig,
    provider: &mut dyn ChatProvider,
    executor: &dyn Executor,
) -> Result<SynthesisSession, SessionError> {
    let mut session = SynthesisSession {
        transcript: Transcript::new(session_id, provider.tag(), provider.model()),
        program: ProgramSource::default(),
        rounds_used: 0,
        error_history: Vec::new(),
        final_failure: None,
        tasks_used: BTreeSet::new(),
        validated: false,
    };
    match drive(&mut session, domain, training, cfg, provider, executor) {
        Ok(()) => Ok(session),
        Err(source) => Err(SessionError {
            session: Box::new(session),
            source,
        }),
    }
}

fn drive(
    s: &mut SynthesisSession,
    domain: &Domain,
    training: &[Task],
    cfg: &SynthesisConfig,
    provider: &mut dyn ChatProvider,
    executor: &dyn Executor,
) -> Result<(), SessionFailure> {
    let prompts = build_stage_prompts(domain, training, &cfg.abbreviation, cfg.mode);
    s.tasks_used
        .extend(training.iter().take(cfg.abbreviation.tasks_in_prompt).map(|t| t.name.clone()));
    let mut reply = String::new();
    for prompt in &prompts {
        reply = query(&mut s.transcript, prompt, provider)?;
    }
    // Only the implementation answer is expected to hold code.
    accumulate(&mut s.program, &reply, 0);

    let budget = cfg.budget();
    let mut start = 0;
    loop {
        let mut failure = None;
        for (i, task) in training.iter().enumerate().skip(start) {
            if let (Verdict::Failed(detail), _) = run_task(&s.program, domain, task, executor, budget)? {
                failure = Some((i, task, detail));
                break;
            }
        }
        let Some((index, task, detail)) = failure else {
            s.validated = true;
            return Ok(());
        };
        let record = ErrorRecord {
            round: s.rounds_used,
            task: task.name.clone(),
            kind: detail.kind(),
        };
        if !cfg.debug_enabled || s.rounds_used >= cfg.max_debug_rounds {
            s.final_failure = Some(record);
            return Ok(());
        }
        s.tasks_used.insert(task.name.clone());
        s.error_history.push(record);
        let message = build_feedback_prompt(&detail, task, domain, &cfg.feedback);
        let reply = query(&mut s.transcript, &message, provider)?;
        s.rounds_used += 1;
        accumulate(&mut s.program, &reply, s.rounds_used);
        start = if cfg.restart_at_first { 0 } else { index };
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskResult {
    pub task: String,
    pub solved: bool,
    pub wall_time_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan_time_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<FeedbackKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan_len: Option<usize>,
}

/// Run the final program on each task and validate what it returns.
pub fn evaluate(
    program: &ProgramSource,
    domain: &Domain,
    tasks: &[Task],
    executor: &dyn Executor,
    budget: Duration,
) -> Result<Vec<TaskResult>, ExecError> {
    tasks
        .iter()
        .map(|task| {
            let (verdict, outcome) = run_task(program, domain, task, executor, budget)?;
            let wall_time_s = outcome.as_ref().map_or(0.0, |o| o.wall_time.as_secs_f64());
            let plan_time_s = outcome.as_ref().and_then(|o| o.plan_time).map(|d| d.as_secs_f64());
            Ok(match verdict {
                Verdict::Solved(plan) => TaskResult {
                    task: task.name.clone(),
                    solved: true,
                    wall_time_s,
                    plan_time_s,
                    failure: None,
                    plan_len: Some(plan.len()),
                },
                Verdict::Failed(detail) => TaskResult {
                    task: task.name.clone(),
                    solved: false,
                    wall_time_s,
                    plan_time_s,
                    failure: Some(detail.kind()),
                    plan_len: None,
                },
            })
        })
        .collect()
}
