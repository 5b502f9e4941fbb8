//! Plan validation: syntax of raw program output, then semantics by simulation.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::sim::{apply, goal_reached, parse_action_with, ActionSyntaxError};
use crate::types::{Atom, Domain, GroundAction, Plan, Task};

/// What a synthesized program returned, unnormalized.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum RawPlanOutput {
    Strings(Vec<String>),
    /// Not a list of strings. `bad_element` is the first non-string element
    /// when the value was a list.
    Malformed {
        description: String,
        bad_element: Option<usize>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationCode {
    NotAList,
    NotAString,
    MissingParentheses,
    UnknownOperator,
    UnknownObject,
    WrongArity,
    TypeMismatch,
}

impl ViolationCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ViolationCode::NotAList => "not-a-list",
            ViolationCode::NotAString => "not-a-string",
            ViolationCode::MissingParentheses => "missing-parentheses",
            ViolationCode::UnknownOperator => "unknown-operator",
            ViolationCode::UnknownObject => "unknown-object",
            ViolationCode::WrongArity => "wrong-arity",
            ViolationCode::TypeMismatch => "type-mismatch",
        }
    }

    fn from_action_error(err: &ActionSyntaxError) -> Self {
        match err {
            ActionSyntaxError::MissingParentheses { .. } => ViolationCode::MissingParentheses,
            ActionSyntaxError::UnknownOperator { .. } => ViolationCode::UnknownOperator,
            ActionSyntaxError::WrongArity { .. } => ViolationCode::WrongArity,
            ActionSyntaxError::UnknownObject { .. } => ViolationCode::UnknownObject,
            ActionSyntaxError::TypeMismatch { .. } => ViolationCode::TypeMismatch,
        }
    }
}

impl fmt::Display for ViolationCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntaxViolation {
    /// Plan position of the offending element; `None` when the output was not a list.
    pub index: Option<usize>,
    /// The offending string, when there is one.
    pub text: Option<String>,
    pub code: ViolationCode,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SyntaxReport {
    Ok(Plan),
    Violation(SyntaxViolation),
}

impl SyntaxReport {
    pub fn plan(&self) -> Option<&Plan> {
        match self {
            SyntaxReport::Ok(plan) => Some(plan),
            SyntaxReport::Violation(_) => None,
        }
    }
}

/// Report the first syntax violation in plan order, or the parsed plan.
pub fn check_syntax(raw: &RawPlanOutput, domain: &Domain, task: &Task) -> SyntaxReport {
    let strings = match raw {
        RawPlanOutput::Strings(s) => s,
        RawPlanOutput::Malformed {
            description,
            bad_element: None,
        } => {
            return SyntaxReport::Violation(SyntaxViolation {
                index: None,
                text: None,
                code: ViolationCode::NotAList,
                message: format!("the returned value is not a list ({description})"),
            })
        }
        RawPlanOutput::Malformed {
            description,
            bad_element: Some(i),
        } => {
            return SyntaxReport::Violation(SyntaxViolation {
                index: Some(*i),
                text: None,
                code: ViolationCode::NotAString,
                message: format!("element {i} of the returned list is not a string ({description})"),
            })
        }
    };

    let objects = task.object_index();
    let mut plan = Vec::with_capacity(strings.len());
    for (i, s) in strings.iter().enumerate() {
        match parse_action_with(s, domain, &objects) {
            Ok(action) => plan.push(action),
            Err(err) => {
                return SyntaxReport::Violation(SyntaxViolation {
                    index: Some(i),
                    text: Some(s.clone()),
                    code: ViolationCode::from_action_error(&err),
                    message: err.to_string(),
                })
            }
        }
    }
    SyntaxReport::Ok(plan)
}

/// One piece of repair advice: an atom and the value it needed.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Advice {
    pub atom: Atom,
    pub value: bool,
}

impl fmt::Display for Advice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(Set {} to {})", self.atom, self.value)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValidationResult {
    Valid,
    PreconditionFailure {
        /// 0-based plan index of the first inapplicable action.
        index: usize,
        action: GroundAction,
        advice: Vec<Advice>,
    },
    GoalFailure {
        unachieved: BTreeSet<Atom>,
    },
}

impl ValidationResult {
    pub fn is_valid(&self) -> bool {
        matches!(self, ValidationResult::Valid)
    }

    /// Step number in the 1-based convention used in feedback text.
    pub fn failure_time(&self) -> Option<usize> {
        match self {
            ValidationResult::PreconditionFailure { index, .. } => Some(index + 1),
            _ => None,
        }
    }
}

/// Simulate `plan` from the initial state of `task`.
///
/// Only the first failing step is reported; goal failures are reported only
/// when every action was applicable.
pub fn validate(plan: &[GroundAction], domain: &Domain, task: &Task) -> ValidationResult {
    let mut state = task.initial_state();
    for (index, action) in plan.iter().enumerate() {
        if let Err(why) = apply(&mut state, action, domain) {
            let advice = why
                .missing
                .into_iter()
                .map(|atom| Advice { atom, value: true })
                .chain(why.violated.into_iter().map(|atom| Advice { atom, value: false }))
                .collect();
            return ValidationResult::PreconditionFailure {
                index,
                action: action.clone(),
                advice,
            };
        }
    }
    if goal_reached(&state, task) {
        ValidationResult::Valid
    } else {
        ValidationResult::GoalFailure {
            unachieved: task
                .goal
                .iter()
                .filter(|g| !state.contains(g))
                .cloned()
                .collect(),
        }
    }
}
