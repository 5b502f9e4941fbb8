//! Several buildings, each with its own elevator. Buildings are never named:
//! floors of different buildings are simply unrelated by `above`.

use std::collections::{BTreeSet, HashMap};

use genplan_core::{Plan, Task};
use rand::Rng;

use super::{act, args_of, fail, OracleError, TaskBuilder};

pub(crate) const MIN_OBJECTS: usize = 3;

/// Objects per building on average; sets how many buildings a task gets.
const OBJECTS_PER_BUILDING: usize = 30;

pub(crate) fn generate<R: Rng>(rng: &mut R, n: usize, b: &mut TaskBuilder) {
    let buildings = rng.gen_range(1..=(n / OBJECTS_PER_BUILDING).max(1));
    let mut sizes = vec![MIN_OBJECTS; buildings];
    for _ in 0..n - MIN_OBJECTS * buildings {
        sizes[rng.gen_range(0..buildings)] += 1;
    }

    let mut passengers = Vec::new();
    for (k, &m) in sizes.iter().enumerate() {
        let floors = rng.gen_range((m / 3).max(2)..=(m / 2).max(2));
        let names: Vec<String> = (0..floors).map(|i| format!("f{i}_b{k}")).collect();
        for f in &names {
            b.object(f, Some("floor"));
        }
        for (i, lower) in names.iter().enumerate() {
            for upper in &names[i + 1..] {
                b.init("above", &[lower, upper]);
            }
        }
        b.init("lift-at", &[&names[rng.gen_range(0..floors)]]);
        for j in 0..m - floors {
            let p = format!("p{j}_b{k}");
            let origin = rng.gen_range(0..floors);
            let mut destin = rng.gen_range(0..floors - 1);
            if destin >= origin {
                destin += 1;
            }
            b.init("origin", &[&p, &names[origin]]);
            b.init("destin", &[&p, &names[destin]]);
            b.goal("served", &[&p]);
            passengers.push(p);
        }
    }
    for p in &passengers {
        b.object(p, Some("passenger"));
    }
}

/// Serve passengers one at a time with whichever elevator shares a building
/// with their origin floor.
pub(crate) fn oracle(task: &Task) -> Result<Plan, OracleError> {
    let above: BTreeSet<(&str, &str)> =
        args_of(&task.init, "above").map(|a| (a[0].as_str(), a[1].as_str())).collect();
    let comparable = |x: &str, y: &str| x == y || above.contains(&(x, y)) || above.contains(&(y, x));
    let mut lifts: Vec<&str> = args_of(&task.init, "lift-at").map(|a| a[0].as_str()).collect();
    let mut plan = Plan::new();
    let travel = |plan: &mut Plan, from: &str, to: &str| {
        if from != to {
            let op = if above.contains(&(from, to)) { "up" } else { "down" };
            plan.push(act(op, &[from, to]));
        }
    };
    let origins = floors(task, "origin");
    let destins = floors(task, "destin");
    for goal in args_of(&task.goal, "served") {
        let p = goal[0].as_str();
        let origin = floor_of(&origins, "origin", p)?;
        let destin = floor_of(&destins, "destin", p)?;
        let Some(k) = lifts.iter().position(|l| comparable(l, origin)) else {
            return fail(format!("no elevator reaches {origin}"));
        };
        if !comparable(origin, destin) {
            return fail(format!("{p} travels between buildings"));
        }
        travel(&mut plan, lifts[k], origin);
        plan.push(act("board", &[origin, p]));
        travel(&mut plan, origin, destin);
        plan.push(act("depart", &[destin, p]));
        lifts[k] = destin;
    }
    Ok(plan)
}

fn floors<'a>(task: &'a Task, predicate: &'a str) -> HashMap<&'a str, &'a str> {
    args_of(&task.init, predicate).map(|a| (a[0].as_str(), a[1].as_str())).collect()
}

fn floor_of<'a>(floors: &HashMap<&str, &'a str>, predicate: &str, p: &str) -> Result<&'a str, OracleError> {
    floors
        .get(p)
        .copied()
        .ok_or_else(|| OracleError(format!("{p} has no {predicate}")))
}
