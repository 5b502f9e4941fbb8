//! Papers start at the home base; every location that wants a paper must
//! end up satisfied. There are exactly as many papers as wanting locations.

use genplan_core::{Plan, Task};
use rand::seq::SliceRandom;
use rand::Rng;

use super::{act, args_of, fail, OracleError, TaskBuilder};

pub(crate) const MIN_OBJECTS: usize = 3;

pub(crate) fn generate<R: Rng>(rng: &mut R, n: usize, b: &mut TaskBuilder) {
    let max_papers = (n - 1) / 2;
    let papers = rng.gen_range((n / 4).clamp(1, max_papers)..=max_papers);
    let locs = n - papers;

    let loc_names: Vec<String> = (0..locs).map(|i| format!("loc-{i}")).collect();
    for l in &loc_names {
        b.object(l, Some("loc"));
    }
    for p in 0..papers {
        b.object(&format!("paper-{p}"), Some("paper"));
    }

    let home = rng.gen_range(0..locs);
    let mut others: Vec<&String> = loc_names.iter().enumerate().filter(|(i, _)| *i != home).map(|(_, l)| l).collect();
    others.shuffle(rng);

    b.init("at", &[&loc_names[home]]);
    b.init("ishomebase", &[&loc_names[home]]);
    for l in &loc_names {
        b.init("safe", &[l]);
    }
    for p in 0..papers {
        b.init("unpacked", &[format!("paper-{p}")]);
    }
    for l in others.into_iter().take(papers) {
        b.init("wantspaper", &[l]);
        b.goal("satisfied", &[l]);
    }
}

/// Pick up every paper at the home base, then visit each wanting location.
pub(crate) fn oracle(task: &Task) -> Result<Plan, OracleError> {
    let Some(home) = args_of(&task.init, "ishomebase").next() else {
        return fail("no home base");
    };
    let home = home[0].as_str();
    let Some(start) = args_of(&task.init, "at").next() else {
        return fail("robot location unknown");
    };
    let mut at = start[0].as_str();
    let mut plan = Plan::new();
    if at != home {
        plan.push(act("move", &[at, home]));
        at = home;
    }
    let papers: Vec<&str> = args_of(&task.init, "unpacked").map(|a| a[0].as_str()).collect();
    let targets: Vec<&str> = args_of(&task.goal, "satisfied")
        .map(|a| a[0].as_str())
        .filter(|l| !task.init.iter().any(|x| x.predicate == "satisfied" && x.args[0] == *l))
        .collect();
    if papers.len() < targets.len() {
        return fail("fewer papers than locations to satisfy");
    }
    for p in &papers[..targets.len()] {
        plan.push(act("pick-up", &[p, home]));
    }
    for (p, loc) in papers.iter().zip(&targets) {
        if at != *loc {
            plan.push(act("move", &[at, loc]));
            at = loc;
        }
        plan.push(act("deliver", &[p, loc]));
    }
    Ok(plan)
}
