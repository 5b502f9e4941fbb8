//! Structural invariants for parsed or generated domains and tasks.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{PddlError, Result};
use crate::types::{Atom, Domain, Task, TypedName};

fn check_type(domain: &Domain, ty: &Option<String>) -> Result<()> {
    match ty {
        Some(t) if !domain.types.contains(t) => Err(PddlError::UnknownType { name: t.clone() }),
        _ => Ok(()),
    }
}

fn check_unique<'a>(kind: &'static str, names: impl IntoIterator<Item = &'a str>) -> Result<()> {
    let mut seen = BTreeSet::new();
    for name in names {
        if !seen.insert(name) {
            return Err(PddlError::Duplicate {
                kind,
                name: name.to_owned(),
            });
        }
    }
    Ok(())
}

fn check_params(domain: &Domain, params: &[TypedName]) -> Result<()> {
    check_unique("variable", params.iter().map(|p| p.name.as_str()))?;
    for p in params {
        check_type(domain, &p.ty)?;
    }
    Ok(())
}

/// Predicate known, arity right, and argument types compatible with `types`.
///
/// An argument with no known type, or a schema parameter without a type,
/// is compatible with anything.
fn check_atom(
    domain: &Domain,
    atom: &Atom,
    arg_type: impl Fn(&str) -> Result<Option<String>>,
) -> Result<()> {
    let schema = domain
        .predicate(&atom.predicate)
        .ok_or_else(|| PddlError::UnknownPredicate {
            name: atom.predicate.clone(),
        })?;
    if schema.arity() != atom.args.len() {
        return Err(PddlError::ArityMismatch {
            name: atom.predicate.clone(),
            expected: schema.arity(),
            found: atom.args.len(),
        });
    }
    for (param, arg) in schema.params.iter().zip(&atom.args) {
        let found = arg_type(arg)?;
        if let (Some(expected), Some(found)) = (&param.ty, found) {
            if *expected != found {
                return Err(PddlError::TypeMismatch {
                    name: atom.predicate.clone(),
                    arg: arg.clone(),
                    expected: expected.clone(),
                    found,
                });
            }
        }
    }
    Ok(())
}

pub fn check_domain(domain: &Domain) -> Result<()> {
    check_unique("type", domain.types.iter().map(String::as_str))?;
    check_unique("predicate", domain.predicates.iter().map(|p| p.name.as_str()))?;
    check_unique("operator", domain.operators.iter().map(|o| o.name.as_str()))?;

    for pred in &domain.predicates {
        check_params(domain, &pred.params)?;
    }

    for op in &domain.operators {
        check_params(domain, &op.params)?;
        let vars: BTreeMap<&str, &Option<String>> =
            op.params.iter().map(|p| (p.name.as_str(), &p.ty)).collect();
        let lookup = |arg: &str| -> Result<Option<String>> {
            match vars.get(arg) {
                Some(ty) => Ok((*ty).clone()),
                None => Err(PddlError::UndeclaredVariable {
                    name: arg.to_owned(),
                    context: op.name.clone(),
                }),
            }
        };
        for atom in op
            .precond_pos
            .iter()
            .chain(&op.precond_neg)
            .chain(&op.add_effects)
            .chain(&op.del_effects)
        {
            check_atom(domain, atom, lookup)?;
        }
        for (a, b) in [
            (&op.precond_pos, &op.precond_neg),
            (&op.add_effects, &op.del_effects),
        ] {
            if let Some(atom) = a.iter().find(|x| b.contains(x)) {
                return Err(PddlError::Contradictory {
                    operator: op.name.clone(),
                    atom: atom.to_string(),
                });
            }
        }
    }
    Ok(())
}

pub fn check_task(task: &Task, domain: &Domain) -> Result<()> {
    if task.domain_name != domain.name {
        return Err(PddlError::DomainMismatch {
            expected: domain.name.clone(),
            found: task.domain_name.clone(),
        });
    }
    check_unique("object", task.objects.iter().map(|o| o.name.as_str()))?;
    for obj in &task.objects {
        check_type(domain, &obj.ty)?;
    }
    let objects = task.object_index();
    let lookup = |arg: &str| -> Result<Option<String>> {
        match objects.get(arg) {
            Some(ty) => Ok(ty.map(str::to_owned)),
            None => Err(PddlError::UnknownObject {
                name: arg.to_owned(),
            }),
        }
    };
    for atom in task.init.iter().chain(&task.goal) {
        check_atom(domain, atom, lookup)?;
    }
    Ok(())
}

impl Domain {
    /// Check the structural invariants a parsed domain satisfies.
    pub fn validate(&self) -> Result<()> {
        check_domain(self)
    }
}

impl Task {
    /// Check the structural invariants of a task against its domain.
    pub fn validate(&self, domain: &Domain) -> Result<()> {
        check_task(self, domain)
    }
}
