//! Per-domain generators and oracle plans.

use std::collections::BTreeSet;

use genplan_core::{Atom, GroundAction, Task, TypedName};
use rand::Rng;
use thiserror::Error;

use crate::{DomainId, GenParams};

pub(crate) mod delivery;
pub(crate) mod ferry;
pub(crate) mod forest;
pub(crate) mod gripper;
pub(crate) mod heavy;
pub(crate) mod miconic;
pub(crate) mod spanner;

/// An oracle was given a task outside its generator's distribution.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("oracle cannot handle task: {0}")]
pub struct OracleError(pub String);

pub(crate) fn generate_one<R: Rng>(
    domain: DomainId,
    rng: &mut R,
    range: (usize, usize),
    params: &GenParams,
    name: &str,
) -> Result<Task, String> {
    let mut b = TaskBuilder::new(domain);
    match domain {
        DomainId::Forest => forest::generate(rng, range, &mut b)?,
        _ => {
            let n = rng.gen_range(range.0..=range.1);
            match domain {
                DomainId::Delivery => delivery::generate(rng, n, &mut b),
                DomainId::Gripper => gripper::generate(rng, n, &mut b),
                DomainId::Miconic => miconic::generate(rng, n, &mut b),
                DomainId::Ferry => ferry::generate(rng, n, &mut b),
                DomainId::Spanner => spanner::generate(rng, n, &mut b),
                DomainId::Heavy => heavy::generate(rng, n, params.heavy_covering_only, &mut b),
                DomainId::Forest => unreachable!(),
            }
        }
    }
    Ok(b.build(name))
}

pub(crate) struct TaskBuilder {
    domain: DomainId,
    objects: Vec<TypedName>,
    init: BTreeSet<Atom>,
    goal: BTreeSet<Atom>,
}

impl TaskBuilder {
    fn new(domain: DomainId) -> Self {
        TaskBuilder {
            domain,
            objects: Vec::new(),
            init: BTreeSet::new(),
            goal: BTreeSet::new(),
        }
    }

    pub(crate) fn object(&mut self, name: &str, ty: Option<&str>) {
        self.objects.push(TypedName::new(name, ty));
    }

    pub(crate) fn init<S: AsRef<str>>(&mut self, predicate: &str, args: &[S]) {
        self.init.insert(Atom::new(predicate, args.iter().map(AsRef::as_ref)));
    }

    pub(crate) fn goal<S: AsRef<str>>(&mut self, predicate: &str, args: &[S]) {
        self.goal.insert(Atom::new(predicate, args.iter().map(AsRef::as_ref)));
    }

    fn build(self, name: &str) -> Task {
        Task {
            name: name.to_owned(),
            domain_name: self.domain.domain().name.clone(),
            objects: self.objects,
            init: self.init,
            goal: self.goal,
        }
    }
}

/// Argument lists of every atom over `predicate`.
pub(crate) fn args_of<'a>(
    atoms: &'a BTreeSet<Atom>,
    predicate: &'a str,
) -> impl Iterator<Item = &'a [String]> + 'a {
    atoms
        .iter()
        .filter(move |a| a.predicate == predicate)
        .map(|a| a.args.as_slice())
}

pub(crate) fn holds(atoms: &BTreeSet<Atom>, predicate: &str, args: &[&str]) -> bool {
    atoms.contains(&Atom::new(predicate, args.iter().copied()))
}

pub(crate) fn act(operator: &str, args: &[&str]) -> GroundAction {
    GroundAction::new(operator, args.iter().copied())
}

pub(crate) fn fail<T>(message: impl Into<String>) -> Result<T, OracleError> {
    Err(OracleError(message.into()))
}
