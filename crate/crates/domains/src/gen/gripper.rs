//! Two rooms, two grippers; every ball starts in the first room and must
//! reach the second.

use std::collections::HashMap;

use genplan_core::{Plan, Task};
use rand::Rng;

use super::{act, args_of, fail, OracleError, TaskBuilder};

pub(crate) const MIN_OBJECTS: usize = 4;

pub(crate) fn generate<R: Rng>(_rng: &mut R, n: usize, b: &mut TaskBuilder) {
    let balls = n - 4;
    for r in ["rooma", "roomb"] {
        b.object(r, None);
        b.init("room", &[r]);
    }
    for i in 1..=balls {
        let ball = format!("ball{i}");
        b.object(&ball, None);
        b.init("ball", &[&ball]);
        b.init("at", &[ball.as_str(), "rooma"]);
        b.goal("at", &[ball.as_str(), "roomb"]);
    }
    for g in ["left", "right"] {
        b.object(g, None);
        b.init("gripper", &[g]);
        b.init("free", &[g]);
    }
    b.init("at-robby", &["rooma"]);
}

/// Carry balls two at a time between each (from, to) room pair.
pub(crate) fn oracle(task: &Task) -> Result<Plan, OracleError> {
    let Some(start) = args_of(&task.init, "at-robby").next() else {
        return fail("robot location unknown");
    };
    let mut robby = start[0].as_str();
    let grippers: Vec<&str> = args_of(&task.init, "gripper").map(|a| a[0].as_str()).collect();
    if grippers.is_empty() {
        return fail("no grippers");
    }
    let location: HashMap<&str, &str> = args_of(&task.init, "at")
        .map(|a| (a[0].as_str(), a[1].as_str()))
        .collect();
    let mut moves: Vec<(&str, &str, &str)> = Vec::new();
    for goal in args_of(&task.goal, "at") {
        let (ball, to) = (goal[0].as_str(), goal[1].as_str());
        let Some(&from) = location.get(ball) else {
            return fail(format!("{ball} has no location"));
        };
        if from != to {
            moves.push((from, to, ball));
        }
    }
    moves.sort();

    let mut plan = Plan::new();
    let mut i = 0;
    while i < moves.len() {
        let (from, to, _) = moves[i];
        let mut batch = vec![];
        while i < moves.len() && batch.len() < grippers.len() && (moves[i].0, moves[i].1) == (from, to) {
            batch.push(moves[i].2);
            i += 1;
        }
        if robby != from {
            plan.push(act("move", &[robby, from]));
        }
        for (ball, g) in batch.iter().zip(&grippers) {
            plan.push(act("pick", &[ball, from, g]));
        }
        plan.push(act("move", &[from, to]));
        for (ball, g) in batch.iter().zip(&grippers) {
            plan.push(act("drop", &[ball, to, g]));
        }
        robby = to;
    }
    Ok(plan)
}
