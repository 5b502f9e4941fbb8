//! Typed-STRIPS PDDL with negative preconditions: parsing, canonical
//! rendering, simulation, full grounding, name ablation and plan validation.

mod ablate;
mod check;
mod error;
mod ground;
mod parse;
mod render;
mod sexpr;
mod sim;
mod types;
mod validate;

pub use ablate::{ablate_names, NameMap};
pub use error::{PddlError, Pos, Result};
pub use ground::{ApplicableTracker, AtomId, BitState, CompiledAction, GroundedTask};
pub use parse::{parse_domain, parse_task};
pub use render::{object_line, render_domain, render_task, render_task_abbreviated, ELLIPSIS_LINE};
pub use sim::{applicable_actions, goal_reached, parse_action_string, step, ActionSyntaxError, Inapplicable};
pub use types::{
    Atom, Domain, GroundAction, GroundAtom, GroundOperator, OperatorSchema, Plan, PredicateSchema,
    State, Task, TypedName,
};
pub use validate::{
    check_syntax, validate, Advice, RawPlanOutput, SyntaxReport, SyntaxViolation, ValidationResult,
    ViolationCode,
};
