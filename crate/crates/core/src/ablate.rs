//! Replace every name in a domain and its tasks with a nondescriptive identifier.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::types::{Atom, Domain, GroundAction, OperatorSchema, PredicateSchema, Task, TypedName};

/// One bijection per name category, original → replacement.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NameMap {
    pub domain: BTreeMap<String, String>,
    pub problems: BTreeMap<String, String>,
    pub predicates: BTreeMap<String, String>,
    pub operators: BTreeMap<String, String>,
    pub variables: BTreeMap<String, String>,
    pub types: BTreeMap<String, String>,
    pub objects: BTreeMap<String, String>,
}

fn assign(map: &mut BTreeMap<String, String>, name: &str, prefix: &str) {
    if !map.contains_key(name) {
        let fresh = format!("{prefix}{}", map.len() + 1);
        map.insert(name.to_owned(), fresh);
    }
}

fn lookup(map: &BTreeMap<String, String>, name: &str) -> String {
    map.get(name).cloned().unwrap_or_else(|| name.to_owned())
}

fn invert(map: &BTreeMap<String, String>) -> BTreeMap<String, String> {
    map.iter().map(|(k, v)| (v.clone(), k.clone())).collect()
}

impl NameMap {
    /// Assign identifiers in order of first appearance.
    pub fn build(domain: &Domain, tasks: &[Task]) -> Self {
        let mut map = NameMap::default();
        assign(&mut map.domain, &domain.name, "domain");
        for ty in &domain.types {
            assign(&mut map.types, ty, "type");
        }
        for pred in &domain.predicates {
            assign(&mut map.predicates, &pred.name, "predicate");
            for p in &pred.params {
                assign(&mut map.variables, &p.name, "?var");
            }
        }
        for op in &domain.operators {
            assign(&mut map.operators, &op.name, "operator");
            for p in &op.params {
                assign(&mut map.variables, &p.name, "?var");
            }
        }
        for task in tasks {
            assign(&mut map.problems, &task.name, "problem");
            for obj in &task.objects {
                assign(&mut map.objects, &obj.name, "object");
            }
        }
        map
    }

    pub fn inverse(&self) -> NameMap {
        NameMap {
            domain: invert(&self.domain),
            problems: invert(&self.problems),
            predicates: invert(&self.predicates),
            operators: invert(&self.operators),
            variables: invert(&self.variables),
            types: invert(&self.types),
            objects: invert(&self.objects),
        }
    }

    fn typed(&self, names: &[TypedName], rename: &BTreeMap<String, String>) -> Vec<TypedName> {
        names
            .iter()
            .map(|n| TypedName {
                name: lookup(rename, &n.name),
                ty: n.ty.as_ref().map(|t| lookup(&self.types, t)),
            })
            .collect()
    }

    fn atom(&self, atom: &Atom, args: &BTreeMap<String, String>) -> Atom {
        Atom {
            predicate: lookup(&self.predicates, &atom.predicate),
            args: atom.args.iter().map(|a| lookup(args, a)).collect(),
        }
    }

    pub fn apply_domain(&self, domain: &Domain) -> Domain {
        let atoms = |list: &[Atom]| list.iter().map(|a| self.atom(a, &self.variables)).collect();
        Domain {
            name: lookup(&self.domain, &domain.name),
            types: domain.types.iter().map(|t| lookup(&self.types, t)).collect(),
            predicates: domain
                .predicates
                .iter()
                .map(|p| PredicateSchema {
                    name: lookup(&self.predicates, &p.name),
                    params: self.typed(&p.params, &self.variables),
                })
                .collect(),
            operators: domain
                .operators
                .iter()
                .map(|o| OperatorSchema {
                    name: lookup(&self.operators, &o.name),
                    params: self.typed(&o.params, &self.variables),
                    precond_pos: atoms(&o.precond_pos),
                    precond_neg: atoms(&o.precond_neg),
                    add_effects: atoms(&o.add_effects),
                    del_effects: atoms(&o.del_effects),
                })
                .collect(),
        }
    }

    pub fn apply_task(&self, task: &Task) -> Task {
        Task {
            name: lookup(&self.problems, &task.name),
            domain_name: lookup(&self.domain, &task.domain_name),
            objects: self.typed(&task.objects, &self.objects),
            init: task.init.iter().map(|a| self.atom(a, &self.objects)).collect(),
            goal: task.goal.iter().map(|a| self.atom(a, &self.objects)).collect(),
        }
    }

    pub fn apply_action(&self, action: &GroundAction) -> GroundAction {
        GroundAction {
            operator: lookup(&self.operators, &action.operator),
            args: action.args.iter().map(|a| lookup(&self.objects, a)).collect(),
        }
    }

    pub fn apply_atom(&self, atom: &Atom) -> Atom {
        self.atom(atom, &self.objects)
    }
}

/// Rename every domain, problem, predicate, operator, variable, type and object.
pub fn ablate_names(domain: &Domain, tasks: &[Task]) -> (Domain, Vec<Task>, NameMap) {
    let map = NameMap::build(domain, tasks);
    let ablated = map.apply_domain(domain);
    let tasks = tasks.iter().map(|t| map.apply_task(t)).collect();
    (ablated, tasks, map)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::{parse_domain, parse_task};

    fn sample() -> (Domain, Task) {
        let domain = parse_domain(
            "(define (domain delivery) (:requirements :strips :typing)
              (:types loc paper)
              (:predicates (at ?l - loc) (carrying ?p - paper))
              (:action move :parameters (?from - loc ?to - loc)
                :precondition (and (at ?from)) :effect (and (at ?to) (not (at ?from)))))",
        )
        .unwrap();
        let task = parse_task(
            "(define (problem p1) (:domain delivery) (:objects a b - loc x - paper)
              (:init (at a)) (:goal (and (at b))))",
            &domain,
        )
        .unwrap();
        (domain, task)
    }

    #[test]
    fn first_predicate_becomes_predicate1() {
        let (domain, task) = sample();
        let (d, ts, map) = ablate_names(&domain, &[task.clone()]);
        assert_eq!(d.predicates[0].name, "predicate1");
        assert_eq!(d.name, "domain1");
        assert_eq!(d.types, ["type1", "type2"]);
        assert_eq!(d.operators[0].name, "operator1");
        assert_eq!(d.operators[0].params[0].name, "?var3");
        assert_eq!(ts[0].name, "problem1");
        assert_eq!(ts[0].objects[2], TypedName::typed("object3", "type2"));
        d.validate().unwrap();
        ts[0].validate(&d).unwrap();

        let inv = map.inverse();
        assert_eq!(inv.apply_domain(&d), domain);
        assert_eq!(inv.apply_task(&ts[0]), task);
    }

    #[test]
    fn ablating_twice_is_canonical() {
        let (domain, task) = sample();
        let (d1, t1, _) = ablate_names(&domain, &[task]);
        let (d2, t2, _) = ablate_names(&d1, &t1);
        assert_eq!(d1, d2);
        assert_eq!(t1, t2);
    }
}
