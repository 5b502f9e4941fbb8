use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

/// A predicate applied to arguments.
///
/// Lifted atoms (inside operator schemas) carry `?variables`; ground atoms
/// carry object names. Both share this representation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Atom {
    pub predicate: String,
    pub args: Vec<String>,
}

pub type GroundAtom = Atom;

impl Atom {
    pub fn new<P, I, S>(predicate: P, args: I) -> Self
    where
        P: Into<String>,
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Atom {
            predicate: predicate.into(),
            args: args.into_iter().map(Into::into).collect(),
        }
    }

    /// Replace every argument found in `binding`; others are kept verbatim.
    pub fn substitute(&self, binding: &BTreeMap<&str, &str>) -> Atom {
        Atom {
            predicate: self.predicate.clone(),
            args: self
                .args
                .iter()
                .map(|a| binding.get(a.as_str()).map_or_else(|| a.clone(), |v| (*v).to_owned()))
                .collect(),
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.predicate)?;
        for arg in &self.args {
            write!(f, " {arg}")?;
        }
        write!(f, ")")
    }
}

/// A variable or object name with an optional type annotation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TypedName {
    pub name: String,
    pub ty: Option<String>,
}

impl TypedName {
    pub fn new(name: impl Into<String>, ty: Option<&str>) -> Self {
        TypedName {
            name: name.into(),
            ty: ty.map(str::to_owned),
        }
    }

    pub fn typed(name: impl Into<String>, ty: impl Into<String>) -> Self {
        TypedName {
            name: name.into(),
            ty: Some(ty.into()),
        }
    }

    pub fn untyped(name: impl Into<String>) -> Self {
        TypedName {
            name: name.into(),
            ty: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredicateSchema {
    pub name: String,
    pub params: Vec<TypedName>,
}

impl PredicateSchema {
    pub fn arity(&self) -> usize {
        self.params.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OperatorSchema {
    pub name: String,
    pub params: Vec<TypedName>,
    pub precond_pos: Vec<Atom>,
    pub precond_neg: Vec<Atom>,
    pub add_effects: Vec<Atom>,
    pub del_effects: Vec<Atom>,
}

impl OperatorSchema {
    pub fn arity(&self) -> usize {
        self.params.len()
    }

    /// Signature without types, e.g. `(walk ?from ?to)`.
    pub fn signature(&self) -> String {
        let mut out = format!("({}", self.name);
        for p in &self.params {
            out.push(' ');
            out.push_str(&p.name);
        }
        out.push(')');
        out
    }

    /// Signature with type annotations where present, e.g. `(pick-up ?p - paper ?l - loc)`.
    pub fn typed_signature(&self) -> String {
        let mut out = format!("({}", self.name);
        for p in &self.params {
            out.push(' ');
            out.push_str(&p.name);
            if let Some(ty) = &p.ty {
                out.push_str(" - ");
                out.push_str(ty);
            }
        }
        out.push(')');
        out
    }

    pub(crate) fn binding<'a>(&'a self, args: &'a [String]) -> BTreeMap<&'a str, &'a str> {
        self.params
            .iter()
            .zip(args)
            .map(|(p, a)| (p.name.as_str(), a.as_str()))
            .collect()
    }

    /// Instantiate preconditions and effects for concrete arguments.
    pub fn instantiate(&self, args: &[String]) -> GroundOperator {
        let binding = self.binding(args);
        let sub = |atoms: &[Atom]| atoms.iter().map(|a| a.substitute(&binding)).collect();
        GroundOperator {
            precond_pos: sub(&self.precond_pos),
            precond_neg: sub(&self.precond_neg),
            add_effects: sub(&self.add_effects),
            del_effects: sub(&self.del_effects),
        }
    }
}

/// Operator schema with a substitution applied.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundOperator {
    pub precond_pos: Vec<Atom>,
    pub precond_neg: Vec<Atom>,
    pub add_effects: Vec<Atom>,
    pub del_effects: Vec<Atom>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Domain {
    pub name: String,
    /// Empty for untyped domains.
    pub types: Vec<String>,
    pub predicates: Vec<PredicateSchema>,
    pub operators: Vec<OperatorSchema>,
}

impl Domain {
    pub fn is_typed(&self) -> bool {
        !self.types.is_empty()
    }

    pub fn predicate(&self, name: &str) -> Option<&PredicateSchema> {
        self.predicates.iter().find(|p| p.name == name)
    }

    pub fn operator(&self, name: &str) -> Option<&OperatorSchema> {
        self.operators.iter().find(|o| o.name == name)
    }

    pub fn has_negative_preconditions(&self) -> bool {
        self.operators.iter().any(|o| !o.precond_neg.is_empty())
    }

    /// Predicates never touched by any operator effect.
    pub fn static_predicates(&self) -> BTreeSet<&str> {
        let mut dynamic = BTreeSet::new();
        for op in &self.operators {
            for atom in op.add_effects.iter().chain(&op.del_effects) {
                dynamic.insert(atom.predicate.as_str());
            }
        }
        self.predicates
            .iter()
            .map(|p| p.name.as_str())
            .filter(|p| !dynamic.contains(p))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Task {
    pub name: String,
    pub domain_name: String,
    pub objects: Vec<TypedName>,
    pub init: BTreeSet<Atom>,
    pub goal: BTreeSet<Atom>,
}

impl Task {
    /// `None` if the object is not declared; `Some(None)` if it is untyped.
    pub fn object_type(&self, name: &str) -> Option<Option<&str>> {
        self.objects
            .iter()
            .find(|o| o.name == name)
            .map(|o| o.ty.as_deref())
    }

    pub fn object_index(&self) -> BTreeMap<&str, Option<&str>> {
        self.objects
            .iter()
            .map(|o| (o.name.as_str(), o.ty.as_deref()))
            .collect()
    }

    pub fn objects_of_type<'a>(&'a self, ty: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.objects
            .iter()
            .filter(move |o| o.ty.as_deref() == Some(ty))
            .map(|o| o.name.as_str())
    }

    pub fn initial_state(&self) -> State {
        State::new(self.init.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroundAction {
    pub operator: String,
    pub args: Vec<String>,
}

impl GroundAction {
    pub fn new<P, I, S>(operator: P, args: I) -> Self
    where
        P: Into<String>,
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        GroundAction {
            operator: operator.into(),
            args: args.into_iter().map(Into::into).collect(),
        }
    }
}

impl fmt::Display for GroundAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.operator)?;
        for arg in &self.args {
            write!(f, " {arg}")?;
        }
        write!(f, ")")
    }
}

pub type Plan = Vec<GroundAction>;

/// Closed-world state: atoms not present are false.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct State {
    atoms: BTreeSet<Atom>,
}

impl State {
    pub fn new(atoms: BTreeSet<Atom>) -> Self {
        State { atoms }
    }

    pub fn contains(&self, atom: &Atom) -> bool {
        self.atoms.contains(atom)
    }

    pub fn atoms(&self) -> &BTreeSet<Atom> {
        &self.atoms
    }

    pub fn into_atoms(self) -> BTreeSet<Atom> {
        self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub(crate) fn apply_in_place(&mut self, op: &GroundOperator) {
        for atom in &op.del_effects {
            self.atoms.remove(atom);
        }
        for atom in &op.add_effects {
            self.atoms.insert(atom.clone());
        }
    }
}

impl FromIterator<Atom> for State {
    fn from_iter<T: IntoIterator<Item = Atom>>(iter: T) -> Self {
        State {
            atoms: iter.into_iter().collect(),
        }
    }
}
