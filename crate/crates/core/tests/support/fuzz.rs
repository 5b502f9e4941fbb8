//! Random well-formed domains and tasks for property tests.

use std::collections::BTreeSet;

use genplan_core::{Atom, Domain, OperatorSchema, PredicateSchema, Task, TypedName};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn random_domain<R: Rng>(rng: &mut R, max_operators: usize) -> Domain {
    let typed = rng.gen_bool(0.6);
    let types: Vec<String> = if typed {
        (0..rng.gen_range(1..=3)).map(|i| format!("t{i}")).collect()
    } else {
        Vec::new()
    };
    let pick_type = |rng: &mut R| -> Option<String> {
        // Occasionally leave a slot untyped inside a typed domain.
        if typed && rng.gen_bool(0.85) {
            types.choose(rng).cloned()
        } else {
            None
        }
    };

    let predicates: Vec<PredicateSchema> = (0..rng.gen_range(1..=5))
        .map(|i| PredicateSchema {
            name: format!("pred-{i}"),
            params: (0..rng.gen_range(0..=2))
                .map(|j| TypedName {
                    name: format!("?a{j}"),
                    ty: pick_type(rng),
                })
                .collect(),
        })
        .collect();

    let mut operators = Vec::new();
    for i in 0..rng.gen_range(0..=max_operators) {
        let params: Vec<TypedName> = (0..rng.gen_range(0..=3))
            .map(|j| TypedName {
                name: format!("?x{j}"),
                ty: pick_type(rng),
            })
            .collect();
        // Candidate lifted atoms whose argument types line up with the predicate.
        let mut candidates = Vec::new();
        for pred in &predicates {
            let pools: Vec<Vec<&TypedName>> = pred
                .params
                .iter()
                .map(|pp| {
                    params
                        .iter()
                        .filter(|p| pp.ty.is_none() || p.ty.is_none() || p.ty == pp.ty)
                        .collect()
                })
                .collect();
            if pools.iter().any(Vec::is_empty) {
                continue;
            }
            for _ in 0..3 {
                let args: Vec<String> =
                    pools.iter().map(|pool| pool.choose(rng).unwrap().name.clone()).collect();
                candidates.push(Atom::new(pred.name.clone(), args));
            }
        }
        candidates.sort();
        candidates.dedup();
        candidates.shuffle(rng);

        let mut op = OperatorSchema {
            name: format!("op-{i}"),
            params,
            precond_pos: vec![],
            precond_neg: vec![],
            add_effects: vec![],
            del_effects: vec![],
        };
        for atom in &candidates {
            match rng.gen_range(0..6) {
                0 | 1 => op.precond_pos.push(atom.clone()),
                2 => op.precond_neg.push(atom.clone()),
                3 => op.add_effects.push(atom.clone()),
                4 => op.del_effects.push(atom.clone()),
                _ => {}
            }
        }
        operators.push(op);
    }

    let domain = Domain {
        name: format!("dom-{}", rng.gen_range(0..1000)),
        types,
        predicates,
        operators,
    };
    domain.validate().expect("fuzzed domain well-formed");
    domain
}

pub fn random_task<R: Rng>(rng: &mut R, domain: &Domain, max_objects: usize) -> Task {
    let n = rng.gen_range(1..=max_objects);
    let objects: Vec<TypedName> = (0..n)
        .map(|i| TypedName {
            name: format!("o{i}"),
            ty: if rng.gen_bool(0.9) { domain.types.choose(rng).cloned() } else { None },
        })
        .collect();

    let mut all_atoms = Vec::new();
    for pred in &domain.predicates {
        let pools: Vec<Vec<&str>> = pred
            .params
            .iter()
            .map(|p| {
                objects
                    .iter()
                    .filter(|o| p.ty.is_none() || o.ty == p.ty)
                    .map(|o| o.name.as_str())
                    .collect()
            })
            .collect();
        let mut tuples: Vec<Vec<&str>> = vec![vec![]];
        for pool in &pools {
            tuples = tuples
                .into_iter()
                .flat_map(|t| {
                    pool.iter().map(move |o| {
                        let mut t = t.clone();
                        t.push(*o);
                        t
                    })
                })
                .collect();
        }
        all_atoms.extend(tuples.into_iter().map(|args| Atom::new(pred.name.clone(), args)));
    }

    let init: BTreeSet<Atom> = all_atoms.iter().filter(|_| rng.gen_bool(0.4)).cloned().collect();
    let goal: BTreeSet<Atom> = all_atoms.iter().filter(|_| rng.gen_bool(0.15)).cloned().collect();
    let task = Task {
        name: format!("task-{}", rng.gen_range(0..1000)),
        domain_name: domain.name.clone(),
        objects,
        init,
        goal,
    };
    task.validate(domain).expect("fuzzed task well-formed");
    task
}
