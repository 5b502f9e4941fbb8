//! Items with a hidden weight order; the box must be packed heaviest first.

use std::collections::{BTreeMap, BTreeSet};

use genplan_core::{Plan, Task};
use rand::seq::SliceRandom;
use rand::Rng;

use super::{act, args_of, fail, OracleError, TaskBuilder};

pub(crate) const MIN_OBJECTS: usize = 1;

pub(crate) fn generate<R: Rng>(rng: &mut R, n: usize, covering_only: bool, b: &mut TaskBuilder) {
    let names: Vec<String> = (1..=n).map(|i| format!("item{i}")).collect();
    for item in &names {
        b.object(item, Some("item"));
        b.goal("packed", &[item]);
    }
    // by_weight[0] is the heaviest.
    let mut by_weight: Vec<&String> = names.iter().collect();
    by_weight.shuffle(rng);
    for (i, heavy) in by_weight.iter().enumerate() {
        let lighter = if covering_only {
            &by_weight[i + 1..(i + 2).min(n)]
        } else {
            &by_weight[i + 1..]
        };
        for light in lighter {
            b.init("heavier", &[heavy, light]);
        }
    }
    b.init::<&str>("box-empty", &[]);
}

/// Sort items topologically by `heavier` and stack them in that order.
pub(crate) fn oracle(task: &Task) -> Result<Plan, OracleError> {
    let items: Vec<&str> = args_of(&task.goal, "packed").map(|a| a[0].as_str()).collect();
    let mut indegree: BTreeMap<&str, usize> = items.iter().map(|i| (*i, 0)).collect();
    let mut lighter: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for pair in args_of(&task.init, "heavier") {
        let (h, l) = (pair[0].as_str(), pair[1].as_str());
        if let Some(d) = indegree.get_mut(l) {
            *d += 1;
            lighter.entry(h).or_default().push(l);
        }
    }
    let mut ready: BTreeSet<&str> = indegree.iter().filter(|(_, d)| **d == 0).map(|(i, _)| *i).collect();
    let mut order = Vec::with_capacity(items.len());
    while let Some(next) = ready.pop_first() {
        order.push(next);
        for l in lighter.get(next).into_iter().flatten() {
            let d = indegree.get_mut(l).expect("counted above");
            *d -= 1;
            if *d == 0 {
                ready.insert(l);
            }
        }
    }
    if order.len() != items.len() {
        return fail("heavier relation has a cycle");
    }

    let mut plan = Plan::new();
    for (k, item) in order.iter().enumerate() {
        match k {
            0 => plan.push(act("put-first", &[item])),
            _ => plan.push(act("stack", &[item, order[k - 1]])),
        }
    }
    Ok(plan)
}
