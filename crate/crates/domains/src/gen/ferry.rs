//! Cars spread over locations, each with a goal location; one ferry that
//! carries a single car.

use std::collections::HashMap;

use genplan_core::{Plan, Task};
use rand::Rng;

use super::{act, args_of, fail, holds, OracleError, TaskBuilder};

pub(crate) const MIN_OBJECTS: usize = 3;

pub(crate) fn generate<R: Rng>(rng: &mut R, n: usize, b: &mut TaskBuilder) {
    let locs = rng.gen_range(2..=(n / 3).max(2));
    let cars = n - locs;
    let loc_names: Vec<String> = (0..locs).map(|i| format!("l{i}")).collect();
    for l in &loc_names {
        b.object(l, None);
        b.init("location", &[l]);
    }
    for c in 0..cars {
        b.object(&format!("c{c}"), None);
    }
    for x in &loc_names {
        for y in &loc_names {
            if x != y {
                b.init("not-eq", &[x, y]);
            }
        }
    }
    b.init("at-ferry", &[&loc_names[rng.gen_range(0..locs)]]);
    b.init::<&str>("empty-ferry", &[]);
    for c in 0..cars {
        let car = format!("c{c}");
        b.init("car", &[&car]);
        b.init("at", &[&car, &loc_names[rng.gen_range(0..locs)]]);
        b.goal("at", &[&car, &loc_names[rng.gen_range(0..locs)]]);
    }
}

/// Ferry each misplaced car directly to its goal, one at a time.
pub(crate) fn oracle(task: &Task) -> Result<Plan, OracleError> {
    let Some(start) = args_of(&task.init, "at-ferry").next() else {
        return fail("ferry location unknown");
    };
    if !holds(&task.init, "empty-ferry", &[]) {
        return fail("ferry starts loaded");
    }
    let mut ferry = start[0].as_str();
    let location: HashMap<&str, &str> = args_of(&task.init, "at")
        .map(|a| (a[0].as_str(), a[1].as_str()))
        .collect();
    let mut plan = Plan::new();
    for goal in args_of(&task.goal, "at") {
        let (car, to) = (goal[0].as_str(), goal[1].as_str());
        let Some(&from) = location.get(car) else {
            return fail(format!("{car} has no location"));
        };
        if from == to {
            continue;
        }
        if ferry != from {
            plan.push(act("sail", &[ferry, from]));
        }
        plan.push(act("board", &[car, from]));
        plan.push(act("sail", &[from, to]));
        plan.push(act("debark", &[car, to]));
        ferry = to;
    }
    Ok(plan)
}
