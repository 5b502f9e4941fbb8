use thiserror::Error;

/// Position in PDDL source text, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl std::fmt::Display for Pos {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PddlError {
    #[error("syntax error at {pos}: {message}")]
    Syntax { pos: Pos, message: String },

    #[error("unsupported PDDL feature: {construct}")]
    Unsupported { construct: String },

    #[error("unknown predicate `{name}`")]
    UnknownPredicate { name: String },

    #[error("unknown type `{name}`")]
    UnknownType { name: String },

    #[error("unknown object `{name}`")]
    UnknownObject { name: String },

    #[error("undeclared variable `{name}` in `{context}`")]
    UndeclaredVariable { name: String, context: String },

    #[error("`{name}` expects {expected} argument(s), found {found}")]
    ArityMismatch {
        name: String,
        expected: usize,
        found: usize,
    },

    #[error("argument `{arg}` of `{name}` has type `{found}`, expected `{expected}`")]
    TypeMismatch {
        name: String,
        arg: String,
        expected: String,
        found: String,
    },

    #[error("problem refers to domain `{found}`, expected `{expected}`")]
    DomainMismatch { expected: String, found: String },

    #[error("duplicate {kind} `{name}`")]
    Duplicate { kind: &'static str, name: String },

    #[error("atom `{atom}` appears both positively and negatively in `{operator}`")]
    Contradictory { operator: String, atom: String },
}

impl PddlError {
    pub(crate) fn syntax(pos: Pos, message: impl Into<String>) -> Self {
        PddlError::Syntax {
            pos,
            message: message.into(),
        }
    }

    pub(crate) fn unsupported(construct: impl Into<String>) -> Self {
        PddlError::Unsupported {
            construct: construct.into(),
        }
    }
}

pub type Result<T, E = PddlError> = std::result::Result<T, E>;
