use thiserror::Error;

use super::ast::Name;
use super::token::Position;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{position}: {message}")]
pub struct LexError {
    pub position: Position,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{position}: expected {expected}, found {found}")]
pub struct ParseError {
    pub position: Position,
    pub expected: String,
    pub found: String,
    /// Set when the input ended early; a line-based reader can keep
    /// accumulating input instead of reporting the error.
    pub at_end: bool,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DesugarError {
    #[error("unbound variable '{name}'")]
    UnboundVariable { name: Name },
    #[error("cannot assign to '{name}': only sandbox-global names are assignable")]
    AssignToBinding { name: Name },
    #[error("'{name}' is free but the sandbox global binder '{binder}' is shadowed here")]
    ShadowedGlobal { name: Name, binder: Name },
}

/// Anything that can go wrong turning text into a core expression.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SyntaxError {
    #[error("lex error at {0}")]
    Lex(#[from] LexError),
    #[error("parse error at {0}")]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Desugar(#[from] DesugarError),
}

impl SyntaxError {
    pub fn is_incomplete(&self) -> bool {
        matches!(self, SyntaxError::Parse(p) if p.at_end)
    }
}
