//! The seven benchmark domains: bundled PDDL, seeded task generators,
//! hand-written oracle plans and the random-rollout baseline.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use genplan_core::{parse_domain, validate, Domain, Plan, Task, ValidationResult};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

mod gen;
mod rollout;

pub use gen::OracleError;
pub use rollout::{random_rollout, random_rollout_grounded, DEFAULT_HORIZON};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainId {
    Delivery,
    Forest,
    Gripper,
    Miconic,
    Ferry,
    Spanner,
    Heavy,
}

impl DomainId {
    pub const ALL: [DomainId; 7] = [
        DomainId::Delivery,
        DomainId::Forest,
        DomainId::Gripper,
        DomainId::Miconic,
        DomainId::Ferry,
        DomainId::Spanner,
        DomainId::Heavy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DomainId::Delivery => "delivery",
            DomainId::Forest => "forest",
            DomainId::Gripper => "gripper",
            DomainId::Miconic => "miconic",
            DomainId::Ferry => "ferry",
            DomainId::Spanner => "spanner",
            DomainId::Heavy => "heavy",
        }
    }

    /// Bundled PDDL source.
    pub fn pddl(self) -> &'static str {
        match self {
            DomainId::Delivery => include_str!("../resources/delivery.pddl"),
            DomainId::Forest => include_str!("../resources/forest.pddl"),
            DomainId::Gripper => include_str!("../resources/gripper.pddl"),
            DomainId::Miconic => include_str!("../resources/miconic.pddl"),
            DomainId::Ferry => include_str!("../resources/ferry.pddl"),
            DomainId::Spanner => include_str!("../resources/spanner.pddl"),
            DomainId::Heavy => include_str!("../resources/heavy.pddl"),
        }
    }

    /// The parsed bundled domain, built once per process.
    pub fn domain(self) -> &'static Domain {
        static CACHE: [OnceLock<Domain>; 7] = [const { OnceLock::new() }; 7];
        CACHE[self as usize].get_or_init(|| {
            parse_domain(self.pddl()).unwrap_or_else(|e| panic!("bundled {self} domain: {e}"))
        })
    }

    /// Inclusive object-count range for a split.
    pub fn object_range(self, split: Split) -> (usize, usize) {
        match (self, split) {
            (DomainId::Delivery, Split::Train) => (9, 17),
            (DomainId::Delivery, Split::Eval) => (70, 100),
            (DomainId::Forest, Split::Train) => (64, 100),
            (DomainId::Forest, Split::Eval) => (100, 144),
            (DomainId::Gripper, Split::Train) => (20, 30),
            (DomainId::Gripper, Split::Eval) => (60, 80),
            (DomainId::Miconic, Split::Train) => (6, 30),
            (DomainId::Miconic, Split::Eval) => (11, 150),
            (DomainId::Ferry, Split::Train) => (13, 20),
            (DomainId::Ferry, Split::Eval) => (30, 50),
            (DomainId::Spanner, Split::Train) => (9, 15),
            (DomainId::Spanner, Split::Eval) => (30, 60),
            (DomainId::Heavy, Split::Train) => (3, 10),
            (DomainId::Heavy, Split::Eval) => (100, 250),
        }
    }

    pub fn default_count(self, split: Split) -> usize {
        match (self, split) {
            (DomainId::Delivery, Split::Train) => 5,
            (DomainId::Forest, Split::Train) => 4,
            (_, Split::Train) => 10,
            (_, Split::Eval) => 30,
        }
    }

    /// Fewest objects a well-formed task of this domain can have.
    pub fn min_objects(self) -> usize {
        match self {
            DomainId::Delivery => gen::delivery::MIN_OBJECTS,
            DomainId::Forest => gen::forest::MIN_OBJECTS,
            DomainId::Gripper => gen::gripper::MIN_OBJECTS,
            DomainId::Miconic => gen::miconic::MIN_OBJECTS,
            DomainId::Ferry => gen::ferry::MIN_OBJECTS,
            DomainId::Spanner => gen::spanner::MIN_OBJECTS,
            DomainId::Heavy => gen::heavy::MIN_OBJECTS,
        }
    }
}

impl fmt::Display for DomainId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("unknown domain `{0}`")]
pub struct UnknownDomain(pub String);

impl FromStr for DomainId {
    type Err = UnknownDomain;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        DomainId::ALL
            .into_iter()
            .find(|d| d.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| UnknownDomain(s.to_owned()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Eval,
}

impl Split {
    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Eval => "eval",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenParams {
    pub domain: DomainId,
    pub split: Split,
    /// Inclusive object-count range.
    pub objects: (usize, usize),
    pub count: usize,
    pub seed: u64,
    /// Heavy only: emit just the covering pairs of the weight order instead
    /// of every `heavier` pair.
    #[serde(default)]
    pub heavy_covering_only: bool,
}

impl GenParams {
    /// Default sizes and counts for a split.
    pub fn new(domain: DomainId, split: Split, seed: u64) -> Self {
        GenParams {
            domain,
            split,
            objects: domain.object_range(split),
            count: domain.default_count(split),
            seed,
            heavy_covering_only: false,
        }
    }

    /// Small tasks of at most `max_objects` objects, for exhaustive checks.
    pub fn small(domain: DomainId, seed: u64, count: usize, max_objects: usize) -> Self {
        GenParams {
            domain,
            split: Split::Train,
            objects: (domain.min_objects(), max_objects),
            count,
            seed,
            heavy_covering_only: false,
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum GenError {
    #[error("{domain}: object range {min}..={max} cannot hold a task ({reason})")]
    Infeasible {
        domain: DomainId,
        min: usize,
        max: usize,
        reason: String,
    },
    #[error("{domain}: generated task `{task}` is not solved by its oracle: {reason}")]
    Uncertified {
        domain: DomainId,
        task: String,
        reason: String,
    },
}

/// Generator RNG for a (domain, split, seed) triple; distinct triples use
/// distinct ChaCha streams.
pub fn generator_rng(domain: DomainId, split: Split, seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(domain as u64 * 2 + split as u64);
    rng
}

/// Generate `params.count` tasks, each certified by the oracle and validator.
pub fn generate(params: &GenParams) -> Result<Vec<Task>, GenError> {
    let domain = params.domain;
    let (lo, hi) = params.objects;
    let infeasible = |reason: String| GenError::Infeasible {
        domain,
        min: lo,
        max: hi,
        reason,
    };
    if lo > hi {
        return Err(infeasible("empty range".into()));
    }
    if hi < domain.min_objects() {
        return Err(infeasible(format!("needs at least {} objects", domain.min_objects())));
    }
    let range = (lo.max(domain.min_objects()), hi);
    let mut rng = generator_rng(domain, params.split, params.seed);
    let mut tasks = Vec::with_capacity(params.count);
    for i in 0..params.count {
        let name = format!("{}-{}-s{}-{i}", domain, params.split, params.seed);
        let task = gen::generate_one(domain, &mut rng, range, params, &name).map_err(infeasible)?;
        certify(domain, &task)?;
        tasks.push(task);
    }
    Ok(tasks)
}

/// Generate a single task with exactly the object count the generator picks
/// from `range`, using a caller-supplied RNG.
pub fn generate_with<R: Rng>(
    domain: DomainId,
    rng: &mut R,
    range: (usize, usize),
    name: &str,
) -> Result<Task, GenError> {
    let params = GenParams {
        domain,
        split: Split::Eval,
        objects: range,
        count: 1,
        seed: 0,
        heavy_covering_only: false,
    };
    let range = (range.0.max(domain.min_objects()), range.1);
    let task = gen::generate_one(domain, rng, range, &params, name).map_err(|reason| {
        GenError::Infeasible {
            domain,
            min: params.objects.0,
            max: params.objects.1,
            reason,
        }
    })?;
    certify(domain, &task)?;
    Ok(task)
}

fn certify(domain: DomainId, task: &Task) -> Result<(), GenError> {
    let uncertified = |reason: String| GenError::Uncertified {
        domain,
        task: task.name.clone(),
        reason,
    };
    task.validate(domain.domain()).map_err(|e| uncertified(e.to_string()))?;
    let plan = oracle_plan(domain, task).map_err(|e| uncertified(e.to_string()))?;
    match validate(&plan, domain.domain(), task) {
        ValidationResult::Valid => Ok(()),
        other => Err(uncertified(format!("{other:?}"))),
    }
}

/// The hand-written generalized plan for `domain` applied to `task`.
pub fn oracle_plan(domain: DomainId, task: &Task) -> Result<Plan, OracleError> {
    match domain {
        DomainId::Delivery => gen::delivery::oracle(task),
        DomainId::Forest => gen::forest::oracle(task),
        DomainId::Gripper => gen::gripper::oracle(task),
        DomainId::Miconic => gen::miconic::oracle(task),
        DomainId::Ferry => gen::ferry::oracle(task),
        DomainId::Spanner => gen::spanner::oracle(task),
        DomainId::Heavy => gen::heavy::oracle(task),
    }
}
