//! Canonical PDDL text for domains and tasks.
//!
//! Output is stable: one atom per line, `(and ...)` always emitted for
//! preconditions, effects and goals, so rendered text can be embedded in
//! prompts and compared byte-for-byte.

use std::fmt::Write;

use crate::types::{Atom, Domain, OperatorSchema, Task, TypedName};

/// Untyped names mixed with typed ones are written `- object`, otherwise a
/// bare name would pick up the type of the group that follows it.
fn typed_list(names: &[TypedName]) -> String {
    let mixed = names.iter().any(|n| n.ty.is_some());
    names
        .iter()
        .map(|n| match &n.ty {
            Some(ty) => format!("{} - {ty}", n.name),
            None if mixed => format!("{} - object", n.name),
            None => n.name.clone(),
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn conjunction(out: &mut String, indent: &str, pos: &[Atom], neg: &[Atom]) {
    if pos.is_empty() && neg.is_empty() {
        out.push_str("(and)\n");
        return;
    }
    out.push_str("(and\n");
    for atom in pos {
        let _ = writeln!(out, "{indent}  {atom}");
    }
    for atom in neg {
        let _ = writeln!(out, "{indent}  (not {atom})");
    }
    let _ = writeln!(out, "{indent})");
}

fn render_operator(out: &mut String, op: &OperatorSchema) {
    let _ = writeln!(out, "  (:action {}", op.name);
    let _ = writeln!(out, "    :parameters ({})", typed_list(&op.params));
    out.push_str("    :precondition ");
    conjunction(out, "    ", &op.precond_pos, &op.precond_neg);
    out.push_str("    :effect ");
    conjunction(out, "    ", &op.add_effects, &op.del_effects);
    out.push_str("  )\n");
}

pub fn render_domain(domain: &Domain) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "(define (domain {})", domain.name);

    let mut reqs = vec![":strips"];
    if domain.is_typed() {
        reqs.push(":typing");
    }
    if domain.has_negative_preconditions() {
        reqs.push(":negative-preconditions");
    }
    let _ = writeln!(out, "  (:requirements {})", reqs.join(" "));

    if domain.is_typed() {
        let _ = writeln!(out, "  (:types {})", domain.types.join(" "));
    }

    out.push_str("  (:predicates\n");
    for pred in &domain.predicates {
        if pred.params.is_empty() {
            let _ = writeln!(out, "    ({})", pred.name);
        } else {
            let _ = writeln!(out, "    ({} {})", pred.name, typed_list(&pred.params));
        }
    }
    out.push_str("  )\n");

    for op in &domain.operators {
        out.push('\n');
        render_operator(&mut out, op);
    }
    out.push_str(")\n");
    out
}

/// Header lines shared by the full and abbreviated task renderings.
pub(crate) fn task_header(out: &mut String, task: &Task) {
    let _ = writeln!(out, "(define (problem {})", task.name);
    let _ = writeln!(out, "  (:domain {})", task.domain_name);
}

pub(crate) fn goal_section(out: &mut String, task: &Task) {
    if task.goal.is_empty() {
        out.push_str("  (:goal (and))\n");
        return;
    }
    out.push_str("  (:goal (and\n");
    for atom in &task.goal {
        let _ = writeln!(out, "    {atom}");
    }
    out.push_str("  ))\n");
}

pub fn object_line(obj: &TypedName) -> String {
    match &obj.ty {
        Some(ty) => format!("{} - {ty}", obj.name),
        None => obj.name.clone(),
    }
}

pub fn render_task(task: &Task) -> String {
    let mut out = String::new();
    task_header(&mut out, task);

    if task.objects.is_empty() {
        out.push_str("  (:objects)\n");
    } else {
        let mixed = task.objects.iter().any(|o| o.ty.is_some());
        out.push_str("  (:objects\n");
        for obj in &task.objects {
            match &obj.ty {
                None if mixed => {
                    let _ = writeln!(out, "    {} - object", obj.name);
                }
                _ => {
                    let _ = writeln!(out, "    {}", object_line(obj));
                }
            }
        }
        out.push_str("  )\n");
    }

    if task.init.is_empty() {
        out.push_str("  (:init)\n");
    } else {
        out.push_str("  (:init\n");
        for atom in &task.init {
            let _ = writeln!(out, "    {atom}");
        }
        out.push_str("  )\n");
    }

    goal_section(&mut out, task);
    out.push_str(")\n");
    out
}

/// Marker line written where a group was truncated.
pub const ELLIPSIS_LINE: &str = "    ; ...";

/// Render `task` listing at most `cap` objects per type and `cap` init atoms
/// per predicate, with [`ELLIPSIS_LINE`] after each truncated group.
///
/// Objects are grouped by type in order of first appearance and init atoms by
/// predicate. The goal is always rendered in full.
pub fn render_task_abbreviated(task: &Task, cap: usize) -> String {
    let mut out = String::new();
    task_header(&mut out, task);

    let mut groups: Vec<(Option<&str>, Vec<&TypedName>)> = Vec::new();
    for obj in &task.objects {
        match groups.iter_mut().find(|(ty, _)| *ty == obj.ty.as_deref()) {
            Some((_, members)) => members.push(obj),
            None => groups.push((obj.ty.as_deref(), vec![obj])),
        }
    }
    let mixed = task.objects.iter().any(|o| o.ty.is_some());
    if groups.is_empty() {
        out.push_str("  (:objects)\n");
    } else {
        out.push_str("  (:objects\n");
        for (ty, members) in &groups {
            for obj in members.iter().take(cap) {
                match ty {
                    None if mixed => {
                        let _ = writeln!(out, "    {} - object", obj.name);
                    }
                    _ => {
                        let _ = writeln!(out, "    {}", object_line(obj));
                    }
                }
            }
            if members.len() > cap {
                let _ = writeln!(out, "{ELLIPSIS_LINE}");
            }
        }
        out.push_str("  )\n");
    }

    if task.init.is_empty() {
        out.push_str("  (:init)\n");
    } else {
        out.push_str("  (:init\n");
        let mut current: Option<&str> = None;
        let mut count = 0;
        for atom in &task.init {
            if current != Some(atom.predicate.as_str()) {
                current = Some(atom.predicate.as_str());
                count = 0;
            }
            count += 1;
            if count <= cap {
                let _ = writeln!(out, "    {atom}");
            } else if count == cap + 1 {
                let _ = writeln!(out, "{ELLIPSIS_LINE}");
            }
        }
        out.push_str("  )\n");
    }

    goal_section(&mut out, task);
    out.push_str(")\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::{parse_domain, parse_task};

    #[test]
    fn empty_goal_renders_canonical_conjunction() {
        let domain = parse_domain("(define (domain d) (:predicates (p)))").unwrap();
        let task = parse_task("(define (problem t) (:domain d))", &domain).unwrap();
        let text = render_task(&task);
        assert!(text.contains("(:goal (and))"), "{text}");
        assert_eq!(parse_task(&text, &domain).unwrap(), task);
    }

    #[test]
    fn single_precondition_still_wrapped_in_and() {
        let domain = parse_domain(
            "(define (domain d) (:predicates (p ?x) (q ?x))
               (:action a :parameters (?x) :precondition (p ?x) :effect (not (p ?x))))",
        )
        .unwrap();
        let text = render_domain(&domain);
        assert!(text.contains(":precondition (and\n      (p ?x)\n    )"), "{text}");
        assert_eq!(parse_domain(&text).unwrap(), domain);
    }

    fn locations(n: usize) -> (Domain, Task) {
        let domain = parse_domain(
            "(define (domain d) (:requirements :strips :typing) (:types loc)
               (:predicates (safe ?l - loc) (at ?l - loc)))",
        )
        .unwrap();
        let objects: Vec<String> = (0..n).map(|i| format!("l{i:02}")).collect();
        let init: String = objects.iter().map(|o| format!("(safe {o}) ")).collect();
        let task = parse_task(
            &format!(
                "(define (problem t) (:domain d) (:objects {} - loc) (:init (at l00) {init}) (:goal (and (at l01))))",
                objects.join(" ")
            ),
            &domain,
        )
        .unwrap();
        (domain, task)
    }

    #[test]
    fn abbreviation_truncates_past_cap() {
        let (_, task) = locations(12);
        let text = render_task_abbreviated(&task, 10);
        assert_eq!(text.matches(" - loc").count(), 10);
        assert_eq!(text.matches("(safe ").count(), 10);
        assert_eq!(text.matches(ELLIPSIS_LINE).count(), 2);
        assert!(text.contains("(:goal (and\n    (at l01)\n  ))"), "{text}");
    }

    #[test]
    fn abbreviation_keeps_exactly_cap() {
        let (_, task) = locations(10);
        let text = render_task_abbreviated(&task, 10);
        assert!(!text.contains(ELLIPSIS_LINE), "{text}");
        assert_eq!(text.matches(" - loc").count(), 10);
    }
}
