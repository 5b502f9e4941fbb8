//! Successor function, goal test and action-string parsing.

use std::collections::BTreeMap;
use std::fmt;

use crate::types::{Atom, Domain, GroundAction, State, Task};

/// Why an action could not be applied.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Inapplicable {
    /// Positive preconditions absent from the state.
    pub missing: Vec<Atom>,
    /// Negative preconditions present in the state.
    pub violated: Vec<Atom>,
}

/// Apply `action` to `state`: `(state \ del) ∪ add`, or report every failed precondition.
///
/// Panics if the operator is not part of `domain`; actions reaching here are
/// expected to come from [`parse_action_string`] or grounding.
pub fn step(state: &State, action: &GroundAction, domain: &Domain) -> Result<State, Inapplicable> {
    let mut next = state.clone();
    apply(&mut next, action, domain)?;
    Ok(next)
}

pub(crate) fn apply(state: &mut State, action: &GroundAction, domain: &Domain) -> Result<(), Inapplicable> {
    let op = domain
        .operator(&action.operator)
        .unwrap_or_else(|| panic!("operator `{}` not in domain", action.operator));
    let ground = op.instantiate(&action.args);
    let mut missing: Vec<Atom> = Vec::new();
    for atom in ground.precond_pos.iter().filter(|a| !state.contains(a)) {
        if !missing.contains(atom) {
            missing.push(atom.clone());
        }
    }
    let mut violated: Vec<Atom> = Vec::new();
    for atom in ground.precond_neg.iter().filter(|a| state.contains(a)) {
        if !violated.contains(atom) {
            violated.push(atom.clone());
        }
    }
    if !missing.is_empty() || !violated.is_empty() {
        return Err(Inapplicable { missing, violated });
    }
    state.apply_in_place(&ground);
    Ok(())
}

pub fn goal_reached(state: &State, task: &Task) -> bool {
    task.goal.iter().all(|g| state.contains(g))
}

/// Ways an action string can fail to name a ground action of the task.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ActionSyntaxError {
    MissingParentheses { text: String },
    UnknownOperator { name: String },
    WrongArity { operator: String, expected: usize, found: usize },
    UnknownObject { name: String },
    TypeMismatch { object: String, expected: String, found: Option<String> },
}

impl ActionSyntaxError {
    /// Stable kebab-case code.
    pub fn code(&self) -> &'static str {
        match self {
            ActionSyntaxError::MissingParentheses { .. } => "missing-parentheses",
            ActionSyntaxError::UnknownOperator { .. } => "unknown-operator",
            ActionSyntaxError::WrongArity { .. } => "wrong-arity",
            ActionSyntaxError::UnknownObject { .. } => "unknown-object",
            ActionSyntaxError::TypeMismatch { .. } => "type-mismatch",
        }
    }

    /// The offending token.
    pub fn token(&self) -> &str {
        match self {
            ActionSyntaxError::MissingParentheses { text } => text,
            ActionSyntaxError::UnknownOperator { name } => name,
            ActionSyntaxError::WrongArity { operator, .. } => operator,
            ActionSyntaxError::UnknownObject { name } => name,
            ActionSyntaxError::TypeMismatch { object, .. } => object,
        }
    }
}

impl fmt::Display for ActionSyntaxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ActionSyntaxError::MissingParentheses { text } => {
                write!(f, "`{text}` is not enclosed in parentheses")
            }
            ActionSyntaxError::UnknownOperator { name } => write!(f, "unknown operator `{name}`"),
            ActionSyntaxError::WrongArity {
                operator,
                expected,
                found,
            } => write!(
                f,
                "operator `{operator}` takes {expected} argument(s) but {found} were given"
            ),
            ActionSyntaxError::UnknownObject { name } => write!(f, "unknown object `{name}`"),
            ActionSyntaxError::TypeMismatch {
                object,
                expected,
                found,
            } => write!(
                f,
                "object `{object}` has type `{}`, expected `{expected}`",
                found.as_deref().unwrap_or("none")
            ),
        }
    }
}

/// Parse `(name obj ...)` against the operators of `domain` and the objects of `task`.
///
/// Matching is case-insensitive, like the PDDL parser.
pub fn parse_action_string(
    s: &str,
    domain: &Domain,
    task: &Task,
) -> Result<GroundAction, ActionSyntaxError> {
    parse_action_with(s, domain, &task.object_index())
}

pub(crate) fn parse_action_with(
    s: &str,
    domain: &Domain,
    objects: &BTreeMap<&str, Option<&str>>,
) -> Result<GroundAction, ActionSyntaxError> {
    let trimmed = s.trim();
    let inner = trimmed
        .strip_prefix('(')
        .and_then(|t| t.strip_suffix(')'))
        .ok_or_else(|| ActionSyntaxError::MissingParentheses { text: s.to_owned() })?;
    if inner.contains(['(', ')']) {
        return Err(ActionSyntaxError::MissingParentheses { text: s.to_owned() });
    }
    let mut tokens = inner.split_whitespace().map(str::to_lowercase);
    let name = tokens.next().unwrap_or_default();
    let args: Vec<String> = tokens.collect();

    let op = domain
        .operator(&name)
        .ok_or_else(|| ActionSyntaxError::UnknownOperator { name: name.clone() })?;
    if op.arity() != args.len() {
        return Err(ActionSyntaxError::WrongArity {
            operator: name,
            expected: op.arity(),
            found: args.len(),
        });
    }
    for (param, arg) in op.params.iter().zip(&args) {
        let found = objects
            .get(arg.as_str())
            .ok_or_else(|| ActionSyntaxError::UnknownObject { name: arg.clone() })?;
        if let Some(expected) = &param.ty {
            if found.as_deref() != Some(expected.as_str()) {
                return Err(ActionSyntaxError::TypeMismatch {
                    object: arg.clone(),
                    expected: expected.clone(),
                    found: found.map(str::to_owned),
                });
            }
        }
    }
    Ok(GroundAction {
        operator: name,
        args,
    })
}

/// All applicable ground actions, found by matching positive preconditions
/// against the state one parameter at a time.
pub fn applicable_actions(state: &State, domain: &Domain, task: &Task) -> Vec<GroundAction> {
    let mut out = Vec::new();
    for op in &domain.operators {
        let candidates: Vec<Vec<&str>> = op
            .params
            .iter()
            .map(|p| match &p.ty {
                Some(ty) => task.objects_of_type(ty).collect(),
                None => task.objects.iter().map(|o| o.name.as_str()).collect(),
            })
            .collect();
        let mut binding: Vec<&str> = Vec::with_capacity(op.arity());
        extend_binding(state, domain, op, &candidates, &mut binding, &mut out);
    }
    out.sort();
    out
}

fn extend_binding<'a>(
    state: &State,
    domain: &Domain,
    op: &crate::types::OperatorSchema,
    candidates: &[Vec<&'a str>],
    binding: &mut Vec<&'a str>,
    out: &mut Vec<GroundAction>,
) {
    let bound: BTreeMap<&str, &str> = op
        .params
        .iter()
        .zip(binding.iter())
        .map(|(p, v)| (p.name.as_str(), *v))
        .collect();
    // Prune as soon as a positive precondition is fully bound and absent.
    for atom in &op.precond_pos {
        if atom.args.iter().all(|a| bound.contains_key(a.as_str()))
            && !state.contains(&atom.substitute(&bound))
        {
            return;
        }
    }
    if binding.len() == op.arity() {
        let action = GroundAction::new(op.name.clone(), binding.iter().copied());
        if op
            .precond_neg
            .iter()
            .all(|a| !state.contains(&a.substitute(&bound)))
        {
            debug_assert!(step(state, &action, domain).is_ok());
            out.push(action);
        }
        return;
    }
    for obj in &candidates[binding.len()] {
        binding.push(obj);
        extend_binding(state, domain, op, candidates, binding, out);
        binding.pop();
    }
}
