//! A grid of cells laid out as a maze with water walls. The marked trail is
//! the maze path from the start to the goal; the maze's dead ends are dirt,
//! and a few dirt cells break walls to open shortcuts along the trail.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use genplan_core::{Plan, Task};
use rand::seq::SliceRandom;
use rand::Rng;

use super::{act, args_of, fail, holds, OracleError, TaskBuilder};

pub(crate) const MIN_OBJECTS: usize = 4;

/// Share of shortcut candidates turned into dirt.
const DIRT_FRACTION: f64 = 0.15;
/// Share of trail cells (after the start) that are hills.
const HILL_FRACTION: f64 = 0.3;
/// A wall is only broken if that skips this many trail steps. Longer jumps
/// would put the goal a few steps from the start.
const SHORTCUT: std::ops::RangeInclusive<usize> = 4..=8;

/// Mazes sampled per task; the one with the longest trail is kept.
const MAZE_SAMPLES: usize = 4;

type Cell = (usize, usize);

fn cell_name((r, c): Cell) -> String {
    format!("r{r}_c{c}")
}

fn dimensions<R: Rng>(rng: &mut R, (lo, hi): (usize, usize)) -> Result<(usize, usize), String> {
    let mut candidates = Vec::new();
    for rows in 2..=hi / 2 {
        for cols in rows..=hi / rows {
            if (lo..=hi).contains(&(rows * cols)) {
                candidates.push((rows, cols));
            }
        }
    }
    // Prefer odd sides, which the maze fills completely, and shapes no more
    // than twice as long as wide.
    let preferred: Vec<_> = candidates
        .iter()
        .copied()
        .filter(|(r, c)| *c <= 2 * r && r % 2 == 1 && c % 2 == 1)
        .collect();
    let pool = if preferred.is_empty() { candidates } else { preferred };
    let &(rows, cols) = pool
        .choose(rng)
        .ok_or_else(|| format!("no grid of at least 2x2 cells has {lo}..={hi} cells"))?;
    Ok(if rng.gen_bool(0.5) { (rows, cols) } else { (cols, rows) })
}

fn neighbours((r, c): Cell, rows: usize, cols: usize) -> impl Iterator<Item = Cell> {
    let up = r.checked_sub(1).map(|r| (r, c));
    let left = c.checked_sub(1).map(|c| (r, c));
    let down = (r + 1 < rows).then_some((r + 1, c));
    let right = (c + 1 < cols).then_some((r, c + 1));
    [up, down, left, right].into_iter().flatten()
}

/// Carve a random spanning tree over the even-coordinate cells. Returns every
/// carved cell and the longest tree path.
fn maze<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> (BTreeSet<Cell>, Vec<Cell>) {
    let (rr, rc) = (rows.div_ceil(2), cols.div_ceil(2));
    let start = (0, 0);
    let mut visited = BTreeSet::from([start]);
    let mut stack = vec![start];
    let mut adjacency: BTreeMap<Cell, Vec<Cell>> = BTreeMap::new();
    while let Some(&room) = stack.last() {
        let mut options: Vec<Cell> = neighbours(room, rr, rc).filter(|n| !visited.contains(n)).collect();
        if options.is_empty() {
            stack.pop();
            continue;
        }
        options.shuffle(rng);
        let next = options[0];
        visited.insert(next);
        adjacency.entry(room).or_default().push(next);
        adjacency.entry(next).or_default().push(room);
        stack.push(next);
    }

    // The trail runs along the maze's diameter: the farthest room from the
    // corner, then the farthest room from that one.
    let far = |from: Cell| -> (Cell, BTreeMap<Cell, Cell>) {
        let mut parent = BTreeMap::new();
        let mut dist = BTreeMap::from([(from, 0usize)]);
        let mut queue = VecDeque::from([from]);
        let mut far = from;
        while let Some(room) = queue.pop_front() {
            for &n in adjacency.get(&room).into_iter().flatten() {
                if !dist.contains_key(&n) {
                    dist.insert(n, dist[&room] + 1);
                    parent.insert(n, room);
                    if dist[&n] > dist[&far] {
                        far = n;
                    }
                    queue.push_back(n);
                }
            }
        }
        (far, parent)
    };
    let (head, _) = far(start);
    let (tail, parent) = far(head);
    let mut rooms = vec![tail];
    while let Some(&p) = parent.get(rooms.last().expect("non-empty")) {
        rooms.push(p);
    }
    rooms.reverse();

    let connector = |a: Cell, b: Cell| (a.0 + b.0, a.1 + b.1);
    let mut carved: BTreeSet<Cell> = visited.iter().map(|&(r, c)| (2 * r, 2 * c)).collect();
    for (&room, next) in &adjacency {
        carved.extend(next.iter().map(|&n| connector(room, n)));
    }
    let mut path = vec![(2 * head.0, 2 * head.1)];
    for pair in rooms.windows(2) {
        path.push(connector(pair[0], pair[1]));
        path.push((2 * pair[1].0, 2 * pair[1].1));
    }
    (carved, path)
}

pub(crate) fn generate<R: Rng>(rng: &mut R, range: (usize, usize), b: &mut TaskBuilder) -> Result<(), String> {
    let (rows, cols) = dimensions(rng, range)?;
    let (carved, path) = (0..MAZE_SAMPLES)
        .map(|_| maze(rng, rows, cols))
        .max_by_key(|(_, path)| path.len())
        .expect("at least one maze");
    let index: BTreeMap<Cell, usize> = path.iter().enumerate().map(|(i, c)| (*c, i)).collect();

    // Dead-end branches of the maze are dirt, plus a few shortcuts.
    let mut dirt: BTreeSet<Cell> = carved.into_iter().filter(|c| !index.contains_key(c)).collect();
    for r in 0..rows {
        for c in 0..cols {
            if index.contains_key(&(r, c)) || dirt.contains(&(r, c)) {
                continue;
            }
            let near: Vec<usize> = neighbours((r, c), rows, cols).filter_map(|n| index.get(&n).copied()).collect();
            let (Some(lo), Some(hi)) = (near.iter().min(), near.iter().max()) else {
                continue;
            };
            if SHORTCUT.contains(&(hi - lo)) && rng.gen_bool(DIRT_FRACTION) {
                dirt.insert((r, c));
            }
        }
    }

    let mut cells = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            b.object(&cell_name((r, c)), None);
            cells.push((r, c));
        }
    }
    for &cell in &cells {
        let name = cell_name(cell);
        for n in neighbours(cell, rows, cols) {
            b.init("adjacent", &[&name, &cell_name(n)]);
        }
        if !index.contains_key(&cell) && !dirt.contains(&cell) {
            b.init("iswater", &[&name]);
        }
    }
    for &cell in &path[1..] {
        if rng.gen_bool(HILL_FRACTION) {
            b.init("ishill", &[cell_name(cell)]);
        }
    }
    for pair in path.windows(2) {
        b.init("ontrail", &[cell_name(pair[0]), cell_name(pair[1])]);
    }
    let goal = cell_name(*path.last().expect("trail has a start"));
    b.init("at", &[cell_name(path[0])]);
    b.init("isgoal", &[&goal]);
    b.goal("at", &[&goal]);
    Ok(())
}

/// Follow the marked trail, climbing onto hills and walking elsewhere.
pub(crate) fn oracle(task: &Task) -> Result<Plan, OracleError> {
    let Some(start) = args_of(&task.init, "at").next() else {
        return fail("hiker location unknown");
    };
    let Some(target) = args_of(&task.goal, "at").next() else {
        return fail("goal has no location");
    };
    let next: BTreeMap<&str, &str> =
        args_of(&task.init, "ontrail").map(|a| (a[0].as_str(), a[1].as_str())).collect();
    let mut here = start[0].as_str();
    let mut plan = Plan::new();
    while here != target[0] {
        let Some(&to) = next.get(here) else {
            return fail(format!("trail ends at {here}"));
        };
        if plan.len() > next.len() {
            return fail("trail loops");
        }
        let op = if holds(&task.init, "ishill", &[to]) { "climb" } else { "walk" };
        plan.push(act(op, &[here, to]));
        here = to;
    }
    Ok(plan)
}
