//! Full grounding of a task into integer-indexed actions.
//!
//! Every operator is instantiated over every type-compatible object tuple.
//! Preconditions on static predicates (never touched by an effect) are
//! decided against the initial state during enumeration and dropped from the
//! compiled action, so the remaining tuples are exactly those that can ever
//! be applicable.

use std::collections::HashMap;

use crate::types::{Atom, Domain, GroundAction, OperatorSchema, State, Task};

pub type AtomId = u32;

#[derive(Debug, Clone)]
pub struct CompiledAction {
    pub action: GroundAction,
    pub pre_pos: Vec<AtomId>,
    pub pre_neg: Vec<AtomId>,
    pub add: Vec<AtomId>,
    pub del: Vec<AtomId>,
}

/// Dense boolean state over interned atoms.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BitState {
    words: Vec<u64>,
}

impl BitState {
    fn new(n: usize) -> Self {
        BitState {
            words: vec![0; n.div_ceil(64)],
        }
    }

    pub fn get(&self, id: AtomId) -> bool {
        self.words[id as usize / 64] >> (id % 64) & 1 == 1
    }

    fn set(&mut self, id: AtomId, value: bool) {
        let word = &mut self.words[id as usize / 64];
        if value {
            *word |= 1 << (id % 64);
        } else {
            *word &= !(1 << (id % 64));
        }
    }
}

#[derive(Debug, Clone)]
pub struct GroundedTask {
    atoms: Vec<Atom>,
    ids: HashMap<Atom, AtomId>,
    actions: Vec<CompiledAction>,
    init: BitState,
    goal: Vec<AtomId>,
}

impl GroundedTask {
    pub fn new(domain: &Domain, task: &Task) -> Self {
        let statics = domain.static_predicates();
        let mut interner = Interner::default();
        for atom in task.init.iter().chain(&task.goal) {
            interner.intern(atom);
        }

        let mut actions = Vec::new();
        for op in &domain.operators {
            let candidates: Vec<Vec<&str>> = op
                .params
                .iter()
                .map(|p| match &p.ty {
                    Some(ty) => task.objects_of_type(ty).collect(),
                    None => task.objects.iter().map(|o| o.name.as_str()).collect(),
                })
                .collect();
            let static_checks = StaticChecks::new(op, &statics);
            let mut binding = Vec::with_capacity(op.arity());
            enumerate(
                op,
                &candidates,
                &static_checks,
                task,
                &mut binding,
                &mut |args: &[&str]| {
                    let args: Vec<String> = args.iter().map(|s| (*s).to_owned()).collect();
                    let ground = op.instantiate(&args);
                    let dynamic = |atoms: &[Atom], interner: &mut Interner| -> Vec<AtomId> {
                        let mut ids: Vec<AtomId> = atoms
                            .iter()
                            .filter(|a| !statics.contains(a.predicate.as_str()))
                            .map(|a| interner.intern(a))
                            .collect();
                        ids.sort_unstable();
                        ids.dedup();
                        ids
                    };
                    actions.push(CompiledAction {
                        pre_pos: dynamic(&ground.precond_pos, &mut interner),
                        pre_neg: dynamic(&ground.precond_neg, &mut interner),
                        add: dynamic(&ground.add_effects, &mut interner),
                        del: dynamic(&ground.del_effects, &mut interner),
                        action: GroundAction::new(op.name.clone(), args),
                    });
                },
            );
        }

        let mut init = BitState::new(interner.atoms.len());
        for atom in &task.init {
            init.set(interner.ids[atom], true);
        }
        let goal = task.goal.iter().map(|a| interner.ids[a]).collect();
        GroundedTask {
            atoms: interner.atoms,
            ids: interner.ids,
            actions,
            init,
            goal,
        }
    }

    pub fn actions(&self) -> &[CompiledAction] {
        &self.actions
    }

    pub fn atom(&self, id: AtomId) -> &Atom {
        &self.atoms[id as usize]
    }

    pub fn atom_id(&self, atom: &Atom) -> Option<AtomId> {
        self.ids.get(atom).copied()
    }

    pub fn initial_state(&self) -> BitState {
        self.init.clone()
    }

    pub fn is_goal(&self, state: &BitState) -> bool {
        self.goal.iter().all(|&g| state.get(g))
    }

    pub fn is_applicable(&self, state: &BitState, action: usize) -> bool {
        let a = &self.actions[action];
        a.pre_pos.iter().all(|&p| state.get(p)) && a.pre_neg.iter().all(|&p| !state.get(p))
    }

    /// Indices of applicable actions, by scanning every grounded action.
    pub fn applicable(&self, state: &BitState) -> Vec<usize> {
        (0..self.actions.len())
            .filter(|&i| self.is_applicable(state, i))
            .collect()
    }

    pub fn apply(&self, state: &mut BitState, action: usize) {
        let a = &self.actions[action];
        for &d in &a.del {
            state.set(d, false);
        }
        for &p in &a.add {
            state.set(p, true);
        }
    }

    pub fn to_state(&self, bits: &BitState) -> State {
        (0..self.atoms.len() as AtomId)
            .filter(|&id| bits.get(id))
            .map(|id| self.atoms[id as usize].clone())
            .collect()
    }
}

#[derive(Default)]
struct Interner {
    atoms: Vec<Atom>,
    ids: HashMap<Atom, AtomId>,
}

impl Interner {
    fn intern(&mut self, atom: &Atom) -> AtomId {
        if let Some(&id) = self.ids.get(atom) {
            return id;
        }
        let id = self.atoms.len() as AtomId;
        self.atoms.push(atom.clone());
        self.ids.insert(atom.clone(), id);
        id
    }
}

/// Static literals of an operator keyed by the parameter position after
/// which all of their variables are bound.
struct StaticChecks<'a> {
    by_depth: Vec<Vec<(bool, &'a Atom, Vec<usize>)>>,
}

impl<'a> StaticChecks<'a> {
    fn new(op: &'a OperatorSchema, statics: &std::collections::BTreeSet<&str>) -> Self {
        let mut by_depth = vec![Vec::new(); op.arity() + 1];
        let literals = op
            .precond_pos
            .iter()
            .map(|a| (true, a))
            .chain(op.precond_neg.iter().map(|a| (false, a)));
        for (positive, atom) in literals {
            if !statics.contains(atom.predicate.as_str()) {
                continue;
            }
            let positions: Vec<usize> = atom
                .args
                .iter()
                .map(|v| op.params.iter().position(|p| &p.name == v).unwrap())
                .collect();
            let depth = positions.iter().map(|p| p + 1).max().unwrap_or(0);
            by_depth[depth].push((positive, atom, positions));
        }
        StaticChecks { by_depth }
    }

    fn holds(&self, depth: usize, binding: &[&str], task: &Task) -> bool {
        self.by_depth[depth].iter().all(|(positive, atom, positions)| {
            let ground = Atom {
                predicate: atom.predicate.clone(),
                args: positions.iter().map(|&p| binding[p].to_owned()).collect(),
            };
            task.init.contains(&ground) == *positive
        })
    }
}

fn enumerate<'a>(
    op: &OperatorSchema,
    candidates: &[Vec<&'a str>],
    checks: &StaticChecks<'_>,
    task: &Task,
    binding: &mut Vec<&'a str>,
    emit: &mut dyn FnMut(&[&str]),
) {
    if !checks.holds(binding.len(), binding, task) {
        return;
    }
    if binding.len() == op.arity() {
        emit(binding);
        return;
    }
    for obj in &candidates[binding.len()] {
        binding.push(obj);
        enumerate(op, candidates, checks, task, binding, emit);
        binding.pop();
    }
}

/// Maintains the applicable-action set incrementally as atoms change,
/// giving O(1) uniform sampling per step.
pub struct ApplicableTracker<'g> {
    grounded: &'g GroundedTask,
    state: BitState,
    /// Per action: positive preconditions false plus negative preconditions true.
    unsatisfied: Vec<u32>,
    /// Per atom: (action, is_positive_precondition).
    watchers: Vec<Vec<(u32, bool)>>,
    applicable: Vec<usize>,
    slot: Vec<Option<usize>>,
}

impl<'g> ApplicableTracker<'g> {
    pub fn new(grounded: &'g GroundedTask) -> Self {
        let state = grounded.initial_state();
        let mut watchers = vec![Vec::new(); grounded.atoms.len()];
        let mut unsatisfied = Vec::with_capacity(grounded.actions.len());
        for (i, a) in grounded.actions.iter().enumerate() {
            let mut count = 0;
            for &p in &a.pre_pos {
                watchers[p as usize].push((i as u32, true));
                count += u32::from(!state.get(p));
            }
            for &p in &a.pre_neg {
                watchers[p as usize].push((i as u32, false));
                count += u32::from(state.get(p));
            }
            unsatisfied.push(count);
        }
        let mut tracker = ApplicableTracker {
            grounded,
            state,
            unsatisfied,
            watchers,
            applicable: Vec::new(),
            slot: vec![None; grounded.actions.len()],
        };
        for i in 0..grounded.actions.len() {
            if tracker.unsatisfied[i] == 0 {
                tracker.insert(i);
            }
        }
        tracker
    }

    pub fn state(&self) -> &BitState {
        &self.state
    }

    /// Currently applicable action indices (order is an implementation detail
    /// but deterministic for a given history).
    pub fn applicable(&self) -> &[usize] {
        &self.applicable
    }

    fn insert(&mut self, action: usize) {
        self.slot[action] = Some(self.applicable.len());
        self.applicable.push(action);
    }

    fn remove(&mut self, action: usize) {
        let idx = self.slot[action].take().expect("action tracked as applicable");
        self.applicable.swap_remove(idx);
        if let Some(&moved) = self.applicable.get(idx) {
            self.slot[moved] = Some(idx);
        }
    }

    fn set_atom(&mut self, id: AtomId, value: bool) {
        if self.state.get(id) == value {
            return;
        }
        self.state.set(id, value);
        for k in 0..self.watchers[id as usize].len() {
            let (action, positive) = self.watchers[id as usize][k];
            let action = action as usize;
            // Becoming satisfied iff value matches the literal's polarity.
            if value == positive {
                self.unsatisfied[action] -= 1;
                if self.unsatisfied[action] == 0 {
                    self.insert(action);
                }
            } else {
                if self.unsatisfied[action] == 0 {
                    self.remove(action);
                }
                self.unsatisfied[action] += 1;
            }
        }
    }

    /// Apply an applicable action.
    pub fn apply(&mut self, action: usize) {
        let grounded = self.grounded;
        let a = &grounded.actions[action];
        // Delete-then-add: an atom in both ends up true.
        for &d in &a.del {
            if !a.add.contains(&d) {
                self.set_atom(d, false);
            }
        }
        for &p in &a.add {
            self.set_atom(p, true);
        }
    }

    pub fn is_goal(&self) -> bool {
        self.grounded.is_goal(&self.state)
    }
}
