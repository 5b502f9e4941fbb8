//! Minimal s-expression reader for PDDL.
//!
//! Comments run from `;` to end of line. All symbols are lowercased so that
//! keyword and identifier matching downstream is case-insensitive.

use crate::error::{PddlError, Pos, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Sexp {
    Symbol { text: String, pos: Pos },
    List { items: Vec<Sexp>, pos: Pos },
}

impl Sexp {
    pub fn pos(&self) -> Pos {
        match self {
            Sexp::Symbol { pos, .. } | Sexp::List { pos, .. } => *pos,
        }
    }

    pub fn as_symbol(&self) -> Option<&str> {
        match self {
            Sexp::Symbol { text, .. } => Some(text),
            Sexp::List { .. } => None,
        }
    }

    pub fn as_list(&self) -> Option<&[Sexp]> {
        match self {
            Sexp::List { items, .. } => Some(items),
            Sexp::Symbol { .. } => None,
        }
    }

    /// The leading symbol of a list, e.g. `and` in `(and ...)`.
    pub fn head(&self) -> Option<&str> {
        self.as_list()?.first()?.as_symbol()
    }
}

#[derive(Debug)]
enum Token {
    Open(Pos),
    Close(Pos),
    Symbol(String, Pos),
}

fn tokenize(src: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut line = 1;
    let mut col = 0;
    let mut chars = src.chars().peekable();
    let mut current: Option<(String, Pos)> = None;

    let flush = |current: &mut Option<(String, Pos)>, tokens: &mut Vec<Token>| {
        if let Some((text, pos)) = current.take() {
            tokens.push(Token::Symbol(text, pos));
        }
    };

    while let Some(c) = chars.next() {
        col += 1;
        let pos = Pos { line, col };
        match c {
            '\n' => {
                flush(&mut current, &mut tokens);
                line += 1;
                col = 0;
            }
            ';' => {
                flush(&mut current, &mut tokens);
                while let Some(&next) = chars.peek() {
                    if next == '\n' {
                        break;
                    }
                    chars.next();
                }
            }
            '(' => {
                flush(&mut current, &mut tokens);
                tokens.push(Token::Open(pos));
            }
            ')' => {
                flush(&mut current, &mut tokens);
                tokens.push(Token::Close(pos));
            }
            c if c.is_whitespace() => flush(&mut current, &mut tokens),
            c => match current.as_mut() {
                Some((text, _)) => text.extend(c.to_lowercase()),
                None => current = Some((c.to_lowercase().collect(), pos)),
            },
        }
    }
    flush(&mut current, &mut tokens);
    tokens
}

/// Reads exactly one top-level form from `src`.
pub fn parse_one(src: &str) -> Result<Sexp> {
    let tokens = tokenize(src);
    let mut stack: Vec<(Vec<Sexp>, Pos)> = Vec::new();
    let mut result: Option<Sexp> = None;

    for token in tokens {
        if result.is_some() {
            let pos = match token {
                Token::Open(p) | Token::Close(p) | Token::Symbol(_, p) => p,
            };
            return Err(PddlError::syntax(pos, "unexpected content after top-level form"));
        }
        match token {
            Token::Open(pos) => stack.push((Vec::new(), pos)),
            Token::Close(pos) => {
                let (items, open) = stack
                    .pop()
                    .ok_or_else(|| PddlError::syntax(pos, "unbalanced `)`"))?;
                let list = Sexp::List { items, pos: open };
                match stack.last_mut() {
                    Some((parent, _)) => parent.push(list),
                    None => result = Some(list),
                }
            }
            Token::Symbol(text, pos) => match stack.last_mut() {
                Some((parent, _)) => parent.push(Sexp::Symbol { text, pos }),
                None => return Err(PddlError::syntax(pos, "expected `(`")),
            },
        }
    }

    if let Some((_, open)) = stack.pop() {
        return Err(PddlError::syntax(open, "unclosed `(`"));
    }
    result.ok_or_else(|| PddlError::syntax(Pos { line: 1, col: 1 }, "empty input"))
}
