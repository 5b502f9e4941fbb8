//! A one-way corridor from the shed to the gate. Spanners lie along the
//! corridor and all nuts are at the gate.

use std::collections::{BTreeMap, BTreeSet};

use genplan_core::{Plan, Task};
use rand::Rng;

use super::{act, args_of, fail, OracleError, TaskBuilder};

pub(crate) const MIN_OBJECTS: usize = 6;

/// Upper bound on spanners beyond one per nut.
const SPARE_SPANNERS: usize = 1;

pub(crate) fn generate<R: Rng>(rng: &mut R, n: usize, b: &mut TaskBuilder) {
    // Besides the man, shed and gate: nuts, a few more spanners than nuts,
    // and at least one corridor location.
    let rest = n - 3;
    let nuts = rng.gen_range(1..=(rest - 1) / 2);
    let spanners = nuts + rng.gen_range(0..=SPARE_SPANNERS.min(rest - 1 - 2 * nuts));
    let locations = rest - nuts - spanners;

    let mut chain = vec!["shed".to_owned()];
    chain.extend((1..=locations).map(|i| format!("location{i}")));
    chain.push("gate".to_owned());

    b.object("bob", Some("man"));
    for l in &chain {
        b.object(l, Some("location"));
    }
    for s in 1..=spanners {
        b.object(&format!("spanner{s}"), Some("spanner"));
    }
    for k in 1..=nuts {
        b.object(&format!("nut{k}"), Some("nut"));
    }

    b.init("at", &["bob", "shed"]);
    for pair in chain.windows(2) {
        b.init("link", &[&pair[0], &pair[1]]);
    }
    for s in 1..=spanners {
        let spanner = format!("spanner{s}");
        b.init("at", &[&spanner, &chain[rng.gen_range(1..=locations)]]);
        b.init("useable", &[&spanner]);
    }
    for k in 1..=nuts {
        let nut = format!("nut{k}");
        b.init("at", &[&nut, "gate"]);
        b.init("loose", &[&nut]);
        b.goal("tightened", &[&nut]);
    }
}

/// Walk the corridor once, picking up every spanner and tightening every
/// loose nut met on the way.
pub(crate) fn oracle(task: &Task) -> Result<Plan, OracleError> {
    let Some(man) = task.objects_of_type("man").next() else {
        return fail("no man");
    };
    let spanners: BTreeSet<&str> = task.objects_of_type("spanner").collect();
    let nuts: BTreeSet<&str> = task.objects_of_type("nut").collect();
    let link: BTreeMap<&str, &str> =
        args_of(&task.init, "link").map(|a| (a[0].as_str(), a[1].as_str())).collect();
    let mut lying: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    let mut here = None;
    for a in args_of(&task.init, "at") {
        let (obj, loc) = (a[0].as_str(), a[1].as_str());
        if obj == man {
            here = Some(loc);
        } else if spanners.contains(obj) || nuts.contains(obj) {
            lying.entry(loc).or_default().push(obj);
        }
    }
    let Some(mut here) = here else {
        return fail("man has no location");
    };
    let mut fresh: Vec<&str> = Vec::new();
    let mut loose: BTreeSet<&str> = args_of(&task.init, "loose").map(|a| a[0].as_str()).collect();
    let useable: BTreeSet<&str> = args_of(&task.init, "useable").map(|a| a[0].as_str()).collect();

    let mut plan = Plan::new();
    for _ in 0..=link.len() {
        for obj in lying.get(here).into_iter().flatten() {
            if spanners.contains(obj) {
                plan.push(act("pickup_spanner", &[here, obj, man]));
                if useable.contains(obj) {
                    fresh.push(obj);
                }
            }
        }
        for obj in lying.get(here).into_iter().flatten() {
            if nuts.contains(obj) && loose.remove(obj) {
                let Some(s) = fresh.pop() else {
                    return fail(format!("no useable spanner left for {obj}"));
                };
                plan.push(act("tighten_nut", &[here, s, man, obj]));
            }
        }
        match link.get(here) {
            Some(next) => {
                plan.push(act("walk", &[here, next, man]));
                here = next;
            }
            None => break,
        }
    }
    Ok(plan)
}
