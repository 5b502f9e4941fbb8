//! Parser for the typed-STRIPS subset with negative preconditions.

use std::collections::BTreeSet;

use crate::check::{check_domain, check_task};
use crate::error::{PddlError, Pos, Result};
use crate::sexpr::{parse_one, Sexp};
use crate::types::{Atom, Domain, OperatorSchema, PredicateSchema, Task, TypedName};

const SUPPORTED_REQUIREMENTS: &[&str] = &[":strips", ":typing", ":negative-preconditions"];

pub fn parse_domain(text: &str) -> Result<Domain> {
    let root = parse_one(text)?;
    let items = expect_list(&root, "domain definition")?;
    expect_keyword(items.first(), "define", root.pos())?;
    let header = items
        .get(1)
        .ok_or_else(|| PddlError::syntax(root.pos(), "missing `(domain <name>)`"))?;
    let name = parse_header(header, "domain")?;

    let mut domain = Domain {
        name,
        types: Vec::new(),
        predicates: Vec::new(),
        operators: Vec::new(),
    };

    for section in &items[2..] {
        let parts = expect_list(section, "domain section")?;
        let key = section
            .head()
            .ok_or_else(|| PddlError::syntax(section.pos(), "expected a section keyword"))?;
        match key {
            ":requirements" => check_requirements(&parts[1..])?,
            ":types" => domain.types = parse_types(&parts[1..])?,
            ":predicates" => {
                for pred in &parts[1..] {
                    domain.predicates.push(parse_predicate(pred)?);
                }
            }
            ":action" => domain.operators.push(parse_action(section)?),
            ":constants" | ":functions" | ":derived" | ":durative-action" | ":constraints" => {
                return Err(PddlError::unsupported(key));
            }
            other => {
                return Err(PddlError::syntax(
                    section.pos(),
                    format!("unknown domain section `{other}`"),
                ))
            }
        }
    }

    check_domain(&domain)?;
    Ok(domain)
}

pub fn parse_task(text: &str, domain: &Domain) -> Result<Task> {
    let root = parse_one(text)?;
    let items = expect_list(&root, "problem definition")?;
    expect_keyword(items.first(), "define", root.pos())?;
    let header = items
        .get(1)
        .ok_or_else(|| PddlError::syntax(root.pos(), "missing `(problem <name>)`"))?;
    let name = parse_header(header, "problem")?;

    let mut domain_name = None;
    let mut objects = Vec::new();
    let mut init = BTreeSet::new();
    let mut goal = BTreeSet::new();

    for section in &items[2..] {
        let parts = expect_list(section, "problem section")?;
        let key = section
            .head()
            .ok_or_else(|| PddlError::syntax(section.pos(), "expected a section keyword"))?;
        match key {
            ":domain" => {
                let sym = parts
                    .get(1)
                    .and_then(Sexp::as_symbol)
                    .ok_or_else(|| PddlError::syntax(section.pos(), "expected domain name"))?;
                domain_name = Some(sym.to_owned());
            }
            ":requirements" => check_requirements(&parts[1..])?,
            ":objects" => objects = parse_typed_list(&parts[1..], false)?,
            ":init" => {
                for atom in &parts[1..] {
                    if atom.head() == Some("not") {
                        return Err(PddlError::unsupported("negative literal in :init"));
                    }
                    if atom.head() == Some("=") {
                        return Err(PddlError::unsupported("numeric fluents in :init"));
                    }
                    init.insert(parse_atom(atom, false)?);
                }
            }
            ":goal" => goal = parse_goal(parts.get(1))?,
            ":metric" => return Err(PddlError::unsupported(":metric")),
            other => {
                return Err(PddlError::syntax(
                    section.pos(),
                    format!("unknown problem section `{other}`"),
                ))
            }
        }
    }

    let domain_name =
        domain_name.ok_or_else(|| PddlError::syntax(root.pos(), "missing `(:domain <name>)`"))?;
    let task = Task {
        name,
        domain_name,
        objects,
        init,
        goal,
    };
    check_task(&task, domain)?;
    Ok(task)
}

fn expect_list<'a>(sexp: &'a Sexp, what: &str) -> Result<&'a [Sexp]> {
    sexp.as_list()
        .ok_or_else(|| PddlError::syntax(sexp.pos(), format!("expected a list for {what}")))
}

fn expect_keyword(sexp: Option<&Sexp>, keyword: &str, pos: Pos) -> Result<()> {
    match sexp.and_then(Sexp::as_symbol) {
        Some(s) if s == keyword => Ok(()),
        _ => Err(PddlError::syntax(
            sexp.map_or(pos, Sexp::pos),
            format!("expected `{keyword}`"),
        )),
    }
}

fn expect_name(sexp: &Sexp, what: &str) -> Result<String> {
    match sexp.as_symbol() {
        Some(s) if !s.starts_with('?') && !s.starts_with(':') => Ok(s.to_owned()),
        _ => Err(PddlError::syntax(sexp.pos(), format!("expected {what}"))),
    }
}

fn parse_header(sexp: &Sexp, kind: &str) -> Result<String> {
    let parts = expect_list(sexp, kind)?;
    expect_keyword(parts.first(), kind, sexp.pos())?;
    match parts {
        [_, name] => expect_name(name, &format!("{kind} name")),
        _ => Err(PddlError::syntax(sexp.pos(), format!("expected `({kind} <name>)`"))),
    }
}

fn check_requirements(reqs: &[Sexp]) -> Result<()> {
    for req in reqs {
        let sym = req
            .as_symbol()
            .ok_or_else(|| PddlError::syntax(req.pos(), "expected requirement keyword"))?;
        if !SUPPORTED_REQUIREMENTS.contains(&sym) {
            return Err(PddlError::unsupported(sym));
        }
    }
    Ok(())
}

fn parse_types(items: &[Sexp]) -> Result<Vec<String>> {
    let entries = parse_typed_list(items, false)?;
    let mut types = Vec::new();
    for entry in entries {
        match entry.ty.as_deref() {
            None | Some("object") => types.push(entry.name),
            Some(parent) => {
                return Err(PddlError::unsupported(format!(
                    "type hierarchy ({} - {parent})",
                    entry.name
                )))
            }
        }
    }
    Ok(types)
}

/// Parses `a b - t c` style lists. Variables must start with `?` iff `variables`.
fn parse_typed_list(items: &[Sexp], variables: bool) -> Result<Vec<TypedName>> {
    let mut out: Vec<TypedName> = Vec::new();
    let mut pending: Vec<String> = Vec::new();
    let mut iter = items.iter();
    while let Some(item) = iter.next() {
        let sym = match item {
            Sexp::Symbol { text, .. } => text.as_str(),
            Sexp::List { .. } => {
                if item.head() == Some("either") {
                    return Err(PddlError::unsupported("either"));
                }
                return Err(PddlError::syntax(item.pos(), "unexpected list in typed list"));
            }
        };
        if sym == "-" {
            let ty = iter
                .next()
                .ok_or_else(|| PddlError::syntax(item.pos(), "missing type after `-`"))?;
            if ty.head() == Some("either") {
                return Err(PddlError::unsupported("either"));
            }
            let ty = expect_name(ty, "type name")?;
            if pending.is_empty() {
                return Err(PddlError::syntax(item.pos(), "`-` without preceding names"));
            }
            // `object` is the implicit root type and stands for "untyped".
            let ty = (ty != "object").then_some(ty);
            out.extend(pending.drain(..).map(|n| TypedName { name: n, ty: ty.clone() }));
            continue;
        }
        if variables != sym.starts_with('?') {
            let what = if variables { "a `?variable`" } else { "a name" };
            return Err(PddlError::syntax(item.pos(), format!("expected {what}, found `{sym}`")));
        }
        pending.push(sym.to_owned());
    }
    out.extend(pending.into_iter().map(TypedName::untyped));
    Ok(out)
}

fn parse_predicate(sexp: &Sexp) -> Result<PredicateSchema> {
    let parts = expect_list(sexp, "predicate declaration")?;
    let name = parts
        .first()
        .ok_or_else(|| PddlError::syntax(sexp.pos(), "empty predicate declaration"))?;
    Ok(PredicateSchema {
        name: expect_name(name, "predicate name")?,
        params: parse_typed_list(&parts[1..], true)?,
    })
}

fn parse_atom(sexp: &Sexp, lifted: bool) -> Result<Atom> {
    let parts = expect_list(sexp, "atom")?;
    let head = parts
        .first()
        .ok_or_else(|| PddlError::syntax(sexp.pos(), "empty atom"))?;
    let predicate = expect_name(head, "predicate name")?;
    if matches!(
        predicate.as_str(),
        "and" | "or" | "not" | "imply" | "exists" | "forall" | "when" | "=" | "increase"
            | "decrease" | "assign"
    ) {
        return Err(PddlError::unsupported(format!(
            "`{predicate}` where an atom was expected"
        )));
    }
    let mut args = Vec::with_capacity(parts.len() - 1);
    for arg in &parts[1..] {
        let sym = arg
            .as_symbol()
            .ok_or_else(|| PddlError::syntax(arg.pos(), "nested term in atom"))?;
        if !lifted && sym.starts_with('?') {
            return Err(PddlError::syntax(arg.pos(), "variable in ground atom"));
        }
        args.push(sym.to_owned());
    }
    Ok(Atom { predicate, args })
}

/// Literals of a conjunction: `(and l1 l2 ...)`, a single literal, or `()`.
fn parse_conjunction(sexp: &Sexp, lifted: bool) -> Result<Vec<(bool, Atom)>> {
    let parts = expect_list(sexp, "formula")?;
    let literals: &[Sexp] = match sexp.head() {
        Some("and") => &parts[1..],
        None if parts.is_empty() => &[],
        _ => std::slice::from_ref(sexp),
    };
    let mut out = Vec::new();
    for lit in literals {
        match lit.head() {
            Some("not") => {
                let inner = lit.as_list().unwrap();
                match inner {
                    [_, atom] => out.push((false, parse_atom(atom, lifted)?)),
                    _ => return Err(PddlError::syntax(lit.pos(), "`not` takes one atom")),
                }
            }
            Some(op @ ("or" | "imply" | "exists" | "forall" | "when" | "and")) => {
                let construct = match op {
                    "or" => "disjunctive formula (or)",
                    "imply" => "implication (imply)",
                    "exists" => "existential quantifier (exists)",
                    "forall" => "universal quantifier (forall)",
                    "when" => "conditional effect (when)",
                    _ => "nested conjunction",
                };
                return Err(PddlError::unsupported(construct));
            }
            Some("=") => return Err(PddlError::unsupported("equality (=)")),
            Some("increase" | "decrease" | "assign" | "scale-up" | "scale-down") => {
                return Err(PddlError::unsupported("numeric effect"))
            }
            _ => out.push((true, parse_atom(lit, lifted)?)),
        }
    }
    Ok(out)
}

fn parse_goal(sexp: Option<&Sexp>) -> Result<BTreeSet<Atom>> {
    let Some(sexp) = sexp else {
        return Ok(BTreeSet::new());
    };
    let mut goal = BTreeSet::new();
    for (positive, atom) in parse_conjunction(sexp, false)? {
        if !positive {
            return Err(PddlError::unsupported("negative goal literal"));
        }
        goal.insert(atom);
    }
    Ok(goal)
}

fn push_unique(list: &mut Vec<Atom>, atom: Atom) {
    if !list.contains(&atom) {
        list.push(atom);
    }
}

fn parse_action(sexp: &Sexp) -> Result<OperatorSchema> {
    let parts = sexp.as_list().unwrap();
    let name = parts
        .get(1)
        .ok_or_else(|| PddlError::syntax(sexp.pos(), "missing action name"))?;
    let mut op = OperatorSchema {
        name: expect_name(name, "action name")?,
        params: Vec::new(),
        precond_pos: Vec::new(),
        precond_neg: Vec::new(),
        add_effects: Vec::new(),
        del_effects: Vec::new(),
    };

    let mut rest = parts[2..].iter();
    while let Some(key) = rest.next() {
        let keyword = key
            .as_symbol()
            .ok_or_else(|| PddlError::syntax(key.pos(), "expected action keyword"))?;
        let value = rest
            .next()
            .ok_or_else(|| PddlError::syntax(key.pos(), format!("missing value for `{keyword}`")))?;
        match keyword {
            ":parameters" => {
                op.params = parse_typed_list(expect_list(value, "parameter list")?, true)?;
            }
            ":precondition" => {
                for (positive, atom) in parse_conjunction(value, true)? {
                    let target = if positive {
                        &mut op.precond_pos
                    } else {
                        &mut op.precond_neg
                    };
                    push_unique(target, atom);
                }
            }
            ":effect" => {
                for (positive, atom) in parse_conjunction(value, true)? {
                    let target = if positive {
                        &mut op.add_effects
                    } else {
                        &mut op.del_effects
                    };
                    push_unique(target, atom);
                }
            }
            other => {
                return Err(PddlError::syntax(
                    key.pos(),
                    format!("unknown action keyword `{other}`"),
                ))
            }
        }
    }
    Ok(op)
}
