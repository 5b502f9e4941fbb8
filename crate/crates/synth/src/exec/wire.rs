//! Host and shim messages: one JSON object per line on the child's standard
//! streams. Sets travel as sorted arrays and atoms as `[predicate, args...]`.

use std::collections::BTreeSet;

use genplan_core::{Atom, Domain, RawPlanOutput, Task, TypedName};
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WireObject {
    Typed([String; 2]),
    Name(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShimRequest {
    pub code: String,
    pub typed: bool,
    pub objects: Vec<WireObject>,
    pub init: Vec<Vec<String>>,
    pub goal: Vec<Vec<String>>,
    pub budget_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShimStatus {
    Plan,
    Exception,
    Timeout,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShimResponse {
    pub status: ShimStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub traceback: Option<String>,
    /// Time spent inside `get_plan`, measured by the shim.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan_time_s: Option<f64>,
}

fn wire_atoms(atoms: &BTreeSet<Atom>) -> Vec<Vec<String>> {
    // BTreeSet order on atoms is predicate then arguments, the same as
    // comparing the encoded arrays.
    atoms
        .iter()
        .map(|a| std::iter::once(a.predicate.clone()).chain(a.args.iter().cloned()).collect())
        .collect()
}

impl ShimRequest {
    pub fn new(code: &str, domain: &Domain, task: &Task, budget_s: f64) -> Self {
        let typed = domain.is_typed();
        let mut objects: Vec<WireObject> = task
            .objects
            .iter()
            .map(|o| match (typed, &o.ty) {
                (true, ty) => WireObject::Typed([o.name.clone(), ty.clone().unwrap_or_else(|| "object".into())]),
                (false, _) => WireObject::Name(o.name.clone()),
            })
            .collect();
        objects.sort();
        ShimRequest {
            code: code.to_owned(),
            typed,
            objects,
            init: wire_atoms(&task.init),
            goal: wire_atoms(&task.goal),
            budget_s,
        }
    }

    pub fn to_line(&self) -> String {
        let mut line = serde_json::to_string(self).expect("request serializes");
        line.push('\n');
        line
    }

    pub fn from_line(line: &str) -> serde_json::Result<Self> {
        serde_json::from_str(line.trim_end())
    }

    /// Objects, init and goal as the structures the program would see.
    pub fn decode(&self) -> (Vec<TypedName>, BTreeSet<Atom>, BTreeSet<Atom>) {
        let objects = self
            .objects
            .iter()
            .map(|o| match o {
                WireObject::Typed([name, ty]) => TypedName::typed(name.clone(), ty.clone()),
                WireObject::Name(name) => TypedName::untyped(name.clone()),
            })
            .collect();
        let atoms = |list: &[Vec<String>]| -> BTreeSet<Atom> {
            list.iter()
                .filter_map(|a| a.split_first())
                .map(|(p, args)| Atom::new(p.as_str(), args.iter().map(String::as_str)))
                .collect()
        };
        (objects, atoms(&self.init), atoms(&self.goal))
    }
}

fn json_type(value: &Value) -> &'static str {
    match value {
        Value::Null => "None",
        Value::Bool(_) => "bool",
        Value::Number(n) if n.is_f64() => "float",
        Value::Number(_) => "int",
        Value::String(_) => "str",
        Value::Array(_) => "list",
        Value::Object(_) => "dict",
    }
}

/// Classify a returned value: a list of strings, or a description of what it
/// was instead.
pub fn raw_from_value(value: &Value) -> RawPlanOutput {
    match value {
        Value::Array(items) => {
            let mut plan = Vec::with_capacity(items.len());
            for (i, item) in items.iter().enumerate() {
                match item {
                    Value::String(s) => plan.push(s.clone()),
                    other => {
                        return RawPlanOutput::Malformed {
                            description: format!("element {i} is a {}", json_type(other)),
                            bad_element: Some(i),
                        }
                    }
                }
            }
            RawPlanOutput::Strings(plan)
        }
        Value::String(s) => RawPlanOutput::Malformed {
            description: format!("got a str: {s:?}"),
            bad_element: None,
        },
        other => RawPlanOutput::Malformed {
            description: format!("got a {}", json_type(other)),
            bad_element: None,
        },
    }
}
