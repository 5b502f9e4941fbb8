//! The random baseline: sample applicable actions uniformly until the goal,
//! a dead end, or the horizon.

use genplan_core::{ApplicableTracker, Domain, GroundedTask, Plan, Task};
use rand::Rng;

pub const DEFAULT_HORIZON: usize = 1000;

/// A plan if the goal was reached within `horizon` steps.
pub fn random_rollout<R: Rng>(domain: &Domain, task: &Task, horizon: usize, rng: &mut R) -> Option<Plan> {
    random_rollout_grounded(&GroundedTask::new(domain, task), horizon, rng)
}

pub fn random_rollout_grounded<R: Rng>(grounded: &GroundedTask, horizon: usize, rng: &mut R) -> Option<Plan> {
    let mut tracker = ApplicableTracker::new(grounded);
    let mut plan = Plan::new();
    loop {
        if tracker.is_goal() {
            return Some(plan);
        }
        let applicable = tracker.applicable();
        if plan.len() == horizon || applicable.is_empty() {
            return None;
        }
        let pick = applicable[rng.gen_range(0..applicable.len())];
        plan.push(grounded.actions()[pick].action.clone());
        tracker.apply(pick);
    }
}
