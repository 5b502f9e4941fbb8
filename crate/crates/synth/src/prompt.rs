//! Exact prompt text: the staged initial prompts, the merged variant, task
//! abbreviation and the four feedback prompts.

use std::fmt::Write as _;

use genplan_core::{
    render_domain, render_task, render_task_abbreviated, Domain, RawPlanOutput, SyntaxViolation, Task,
    ValidationResult, ViolationCode,
};
use serde::{Deserialize, Serialize};

const SUMMARY: &str = include_str!("../resources/prompts/summary.txt");
const STRATEGY: &str = include_str!("../resources/prompts/strategy.txt");
const IMPLEMENT: &str = include_str!("../resources/prompts/implement.txt");
const MERGED: &str = include_str!("../resources/prompts/merged.txt");
const EXCEPTION: &str = include_str!("../resources/prompts/exception.txt");
const TIMEOUT: &str = include_str!("../resources/prompts/timeout.txt");
const SYNTAX: &str = include_str!("../resources/prompts/syntax.txt");
const SEMANTICS: &str = include_str!("../resources/prompts/semantics.txt");
const PRECONDITION_NOTE: &str = include_str!("../resources/prompts/precondition_note.txt");
const GOAL_NOTE: &str = include_str!("../resources/prompts/goal_note.txt");

/// Frames kept from the end of a traceback.
pub const TRACEBACK_FRAMES: usize = 20;
pub const OMITTED_FILE: &str = "<file-name-omitted>";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct AbbreviationConfig {
    /// Objects per type and init atoms per predicate shown before truncating.
    pub cap: usize,
    pub tasks_in_prompt: usize,
}

impl Default for AbbreviationConfig {
    fn default() -> Self {
        AbbreviationConfig {
            cap: 10,
            tasks_in_prompt: 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Role {
    User,
    Assistant,
    SystemNote,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptMessage {
    pub role: Role,
    pub text: String,
}

impl PromptMessage {
    pub fn user(text: impl Into<String>) -> Self {
        PromptMessage {
            role: Role::User,
            text: text.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeedbackKind {
    PythonException,
    Timeout,
    PlanSyntax,
    PlanSemantics,
}

impl FeedbackKind {
    pub const ALL: [FeedbackKind; 4] = [
        FeedbackKind::PythonException,
        FeedbackKind::Timeout,
        FeedbackKind::PlanSyntax,
        FeedbackKind::PlanSemantics,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FeedbackKind::PythonException => "python_exception",
            FeedbackKind::Timeout => "timeout",
            FeedbackKind::PlanSyntax => "plan_syntax",
            FeedbackKind::PlanSemantics => "plan_semantics",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PromptMode {
    #[default]
    Cot,
    Merged,
}

/// What went wrong, in enough detail to write the feedback prompt.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FeedbackDetail {
    Exception {
        traceback: String,
    },
    Timeout {
        traceback: String,
    },
    Syntax {
        raw: RawPlanOutput,
        violation: SyntaxViolation,
    },
    Semantics {
        plan: Vec<String>,
        result: ValidationResult,
    },
}

impl FeedbackDetail {
    pub fn kind(&self) -> FeedbackKind {
        match self {
            FeedbackDetail::Exception { .. } => FeedbackKind::PythonException,
            FeedbackDetail::Timeout { .. } => FeedbackKind::Timeout,
            FeedbackDetail::Syntax { .. } => FeedbackKind::PlanSyntax,
            FeedbackDetail::Semantics { .. } => FeedbackKind::PlanSemantics,
        }
    }
}

/// Options for feedback rendering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct FeedbackConfig {
    /// Elide the middle of returned plans longer than this. `None` shows the
    /// whole plan.
    pub plan_cap: Option<usize>,
}

/// Replace `{name}` placeholders in one pass, so substituted text is never
/// scanned again.
fn fill(template: &str, values: &[(&str, &str)]) -> String {
    let template = template.strip_suffix('\n').unwrap_or(template);
    let mut out = String::with_capacity(template.len());
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let after = &rest[open + 1..];
        let key = after
            .find('}')
            .map(|close| &after[..close])
            .filter(|k| !k.is_empty() && k.chars().all(|c| c.is_ascii_lowercase() || c == '_'));
        match key.and_then(|k| values.iter().find(|(name, _)| *name == k)) {
            Some((name, value)) => {
                out.push_str(value);
                rest = &after[name.len() + 1..];
            }
            None => {
                out.push('{');
                rest = after;
            }
        }
    }
    out.push_str(rest);
    out
}

fn trimmed(text: &str) -> &str {
    text.trim_end_matches('\n')
}

/// Abbreviated problem text: at most `cap` objects per type and init atoms
/// per predicate, a `; ...` line after each truncated group, goal in full.
pub fn abbreviate_task(task: &Task, cfg: &AbbreviationConfig) -> String {
    render_task_abbreviated(task, cfg.cap.max(1))
}

fn implementation_block(domain: &Domain) -> String {
    let objects = if domain.is_typed() {
        "a set of (object name, type name) tuples"
    } else {
        "a set of object names"
    };
    fill(IMPLEMENT, &[("objects", objects)])
}

fn example_problems(training: &[Task], cfg: &AbbreviationConfig) -> String {
    training
        .iter()
        .take(cfg.tasks_in_prompt.max(1))
        .map(|t| trimmed(&abbreviate_task(t, cfg)).to_owned())
        .collect::<Vec<_>>()
        .join("\n\n")
}

/// The initial prompts: three user messages in cot mode, one in merged mode.
///
/// Panics if fewer than `cfg.tasks_in_prompt` training tasks are given.
pub fn build_stage_prompts(
    domain: &Domain,
    training: &[Task],
    cfg: &AbbreviationConfig,
    mode: PromptMode,
) -> Vec<PromptMessage> {
    assert!(
        training.len() >= cfg.tasks_in_prompt,
        "need {} training tasks for the prompt, got {}",
        cfg.tasks_in_prompt,
        training.len()
    );
    let domain_text = render_domain(domain);
    let tasks = example_problems(training, cfg);
    let implementation = implementation_block(domain);
    match mode {
        PromptMode::Cot => vec![
            PromptMessage::user(fill(SUMMARY, &[("domain", trimmed(&domain_text)), ("tasks", &tasks)])),
            PromptMessage::user(fill(STRATEGY, &[])),
            PromptMessage::user(implementation),
        ],
        PromptMode::Merged => vec![PromptMessage::user(fill(
            MERGED,
            &[
                ("domain", trimmed(&domain_text)),
                ("tasks", &tasks),
                ("implementation", &implementation),
            ],
        ))],
    }
}

/// Python `repr` of a string.
fn py_repr(s: &str) -> String {
    let quote = if s.contains('\'') && !s.contains('"') { '"' } else { '\'' };
    let mut out = String::with_capacity(s.len() + 2);
    out.push(quote);
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if c == quote => {
                out.push('\\');
                out.push(c);
            }
            c if (c as u32) < 0x20 || c as u32 == 0x7f => {
                let _ = write!(out, "\\x{:02x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push(quote);
    out
}

/// The plan as the Python list the program returned.
pub fn plan_listing(plan: &[String], cap: Option<usize>) -> String {
    let items: Vec<String> = match cap {
        Some(cap) if plan.len() > cap => {
            let head = cap.div_ceil(2);
            let tail = cap / 2;
            let mut items: Vec<String> = plan[..head].iter().map(|s| py_repr(s)).collect();
            items.push(format!("<{} actions omitted>", plan.len() - head - tail));
            items.extend(plan[plan.len() - tail..].iter().map(|s| py_repr(s)));
            items
        }
        _ => plan.iter().map(|s| py_repr(s)).collect(),
    };
    format!("[{}]", items.join(", "))
}

/// Strip host paths from a Python traceback and keep only the last
/// [`TRACEBACK_FRAMES`] frames.
pub fn sanitize_traceback(traceback: &str) -> String {
    let lines: Vec<String> = traceback
        .trim_end()
        .lines()
        .map(|line| {
            let Some(start) = line.find("File \"") else {
                return line.to_owned();
            };
            let after = &line[start + 6..];
            match after.find('"') {
                Some(end) => format!("{}File \"{OMITTED_FILE}\"{}", &line[..start], &after[end + 1..]),
                None => line.to_owned(),
            }
        })
        .collect();
    let frames: Vec<usize> = lines
        .iter()
        .enumerate()
        .filter(|(_, l)| l.trim_start().starts_with("File \""))
        .map(|(i, _)| i)
        .collect();
    if frames.len() <= TRACEBACK_FRAMES {
        return lines.join("\n");
    }
    let keep_from = frames[frames.len() - TRACEBACK_FRAMES];
    let first = frames[0];
    let mut out: Vec<String> = lines[..first].to_vec();
    out.push(format!("  ... {} earlier frames omitted ...", frames.len() - TRACEBACK_FRAMES));
    out.extend(lines[keep_from..].iter().cloned());
    out.join("\n")
}

fn operator_list(domain: &Domain) -> String {
    let mut signatures: Vec<String> = domain.operators.iter().map(|o| o.typed_signature()).collect();
    signatures.sort();
    signatures.join(" ")
}

fn syntax_problem(violation: &SyntaxViolation, raw: &RawPlanOutput) -> String {
    match (violation.code, &violation.text, violation.index) {
        (ViolationCode::NotAList, _, _) => match raw {
            RawPlanOutput::Malformed { description, .. } => {
                format!("the returned value is not a list of strings ({description}).")
            }
            RawPlanOutput::Strings(_) => "the returned value is not a list of strings.".to_owned(),
        },
        (ViolationCode::NotAString, _, Some(i)) => format!("the element at step {i} is not a string."),
        (_, Some(text), Some(i)) => format!("the action {text} is invalid at step {i}."),
        _ => format!("{}.", violation.message),
    }
}

fn raw_listing(raw: &RawPlanOutput, cap: Option<usize>) -> String {
    match raw {
        RawPlanOutput::Strings(plan) => plan_listing(plan, cap),
        RawPlanOutput::Malformed { description, .. } => description.clone(),
    }
}

/// A repair prompt for a failure on `task`, which is shown in full.
pub fn build_feedback_prompt(
    detail: &FeedbackDetail,
    task: &Task,
    domain: &Domain,
    cfg: &FeedbackConfig,
) -> PromptMessage {
    let task_text = render_task(task);
    let task_text = trimmed(&task_text);
    let text = match detail {
        FeedbackDetail::Exception { traceback } => fill(
            EXCEPTION,
            &[("task", task_text), ("traceback", &sanitize_traceback(traceback))],
        ),
        FeedbackDetail::Timeout { traceback } => fill(
            TIMEOUT,
            &[("task", task_text), ("traceback", &sanitize_traceback(traceback))],
        ),
        FeedbackDetail::Syntax { raw, violation } => fill(
            SYNTAX,
            &[
                ("task", task_text),
                ("plan", &raw_listing(raw, cfg.plan_cap)),
                ("problem", &syntax_problem(violation, raw)),
                ("operators", &operator_list(domain)),
            ],
        ),
        FeedbackDetail::Semantics { plan, result } => {
            let notes = match result {
                ValidationResult::PreconditionFailure { action, advice, .. } => {
                    let advice: Vec<String> = advice.iter().map(ToString::to_string).collect();
                    let time = result.failure_time().unwrap_or_default().to_string();
                    fill(
                        PRECONDITION_NOTE,
                        &[
                            ("action", &action.to_string()),
                            ("time", &time),
                            ("advice", &advice.join("\n")),
                        ],
                    )
                }
                ValidationResult::GoalFailure { unachieved } => unachieved
                    .iter()
                    .map(|atom| fill(GOAL_NOTE, &[("atom", &atom.to_string())]))
                    .collect::<Vec<_>>()
                    .join("\n"),
                ValidationResult::Valid => String::new(),
            };
            fill(
                SEMANTICS,
                &[
                    ("task", task_text),
                    ("plan", &plan_listing(plan, cfg.plan_cap)),
                    ("notes", &notes),
                ],
            )
        }
    };
    PromptMessage::user(text)
}
