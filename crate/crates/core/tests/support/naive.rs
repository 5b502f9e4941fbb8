//! Exhaustive-grounding simulator over plain strings.
//!
//! Shares nothing with the library's simulator beyond the parsed schema
//! structs: substitution, grounding and set semantics are written out here.

use std::collections::{BTreeSet, HashMap, HashSet};

use genplan_core::{Domain, GroundAction, Task};

#[derive(Debug, Clone)]
pub struct NaiveAction {
    pub name: String,
    pub args: Vec<String>,
    pub pre_pos: Vec<String>,
    pub pre_neg: Vec<String>,
    pub add: Vec<String>,
    pub del: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NaiveOutcome {
    Valid,
    PreconditionFailure {
        index: usize,
        /// Rendered advice, e.g. `(Set (at l1) to true)`.
        advice: Vec<String>,
    },
    GoalFailure {
        unachieved: BTreeSet<String>,
    },
}

pub struct NaiveSim {
    pub actions: HashMap<String, NaiveAction>,
    pub init: HashSet<String>,
    pub goal: Vec<String>,
}

fn atom_text(pred: &str, args: &[String], sub: &HashMap<String, String>) -> String {
    let mut s = format!("({pred}");
    for a in args {
        s.push(' ');
        s.push_str(sub.get(a).unwrap_or(a));
    }
    s.push(')');
    s
}

fn tuples(pools: &[Vec<String>]) -> Vec<Vec<String>> {
    let mut out = vec![vec![]];
    for pool in pools {
        let mut next = Vec::new();
        for prefix in &out {
            for obj in pool {
                let mut t = prefix.clone();
                t.push(obj.clone());
                next.push(t);
            }
        }
        out = next;
    }
    out
}

impl NaiveSim {
    pub fn new(domain: &Domain, task: &Task) -> Self {
        let mut actions = HashMap::new();
        for op in &domain.operators {
            let pools: Vec<Vec<String>> = op
                .params
                .iter()
                .map(|p| {
                    task.objects
                        .iter()
                        .filter(|o| p.ty.is_none() || o.ty == p.ty)
                        .map(|o| o.name.clone())
                        .collect()
                })
                .collect();
            for args in tuples(&pools) {
                let sub: HashMap<String, String> = op
                    .params
                    .iter()
                    .map(|p| p.name.clone())
                    .zip(args.iter().cloned())
                    .collect();
                let ground = |atoms: &[genplan_core::Atom]| {
                    atoms
                        .iter()
                        .map(|a| atom_text(&a.predicate, &a.args, &sub))
                        .collect::<Vec<_>>()
                };
                actions.insert(
                    Self::key(&GroundAction::new(op.name.clone(), args.clone())),
                    NaiveAction {
                        name: op.name.clone(),
                        args: args.clone(),
                        pre_pos: ground(&op.precond_pos),
                        pre_neg: ground(&op.precond_neg),
                        add: ground(&op.add_effects),
                        del: ground(&op.del_effects),
                    },
                );
            }
        }
        let none = HashMap::new();
        NaiveSim {
            actions,
            init: task.init.iter().map(|a| atom_text(&a.predicate, &a.args, &none)).collect(),
            goal: task.goal.iter().map(|a| atom_text(&a.predicate, &a.args, &none)).collect(),
        }
    }

    pub fn key(action: &GroundAction) -> String {
        if action.args.is_empty() {
            format!("({})", action.operator)
        } else {
            format!("({} {})", action.operator, action.args.join(" "))
        }
    }

    pub fn applicable_in(&self, state: &HashSet<String>) -> BTreeSet<String> {
        self.actions
            .iter()
            .filter(|(_, a)| {
                a.pre_pos.iter().all(|p| state.contains(p))
                    && a.pre_neg.iter().all(|p| !state.contains(p))
            })
            .map(|(k, _)| k.clone())
            .collect()
    }

    /// Returns the successor, or `None` if inapplicable.
    pub fn successor(&self, state: &HashSet<String>, key: &str) -> Option<HashSet<String>> {
        let a = &self.actions[key];
        if !a.pre_pos.iter().all(|p| state.contains(p)) || a.pre_neg.iter().any(|p| state.contains(p)) {
            return None;
        }
        let mut next: HashSet<String> = state.iter().filter(|s| !a.del.contains(s)).cloned().collect();
        next.extend(a.add.iter().cloned());
        Some(next)
    }

    pub fn run(&self, plan: &[GroundAction]) -> NaiveOutcome {
        let mut state = self.init.clone();
        for (index, action) in plan.iter().enumerate() {
            let key = Self::key(action);
            let a = &self.actions[&key];
            let mut advice = Vec::new();
            let mut seen = HashSet::new();
            for p in &a.pre_pos {
                if !state.contains(p) && seen.insert(p.clone()) {
                    advice.push(format!("(Set {p} to true)"));
                }
            }
            for p in &a.pre_neg {
                if state.contains(p) && seen.insert(p.clone()) {
                    advice.push(format!("(Set {p} to false)"));
                }
            }
            if !advice.is_empty() {
                return NaiveOutcome::PreconditionFailure { index, advice };
            }
            state = self.successor(&state, &key).unwrap();
        }
        let unachieved: BTreeSet<String> =
            self.goal.iter().filter(|g| !state.contains(*g)).cloned().collect();
        if unachieved.is_empty() {
            NaiveOutcome::Valid
        } else {
            NaiveOutcome::GoalFailure { unachieved }
        }
    }
}
