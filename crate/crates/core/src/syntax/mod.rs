//! Surface syntax: tokens, parsing, desugaring to the core calculus and
//! printing back.

mod ast;
mod desugar;
mod error;
mod parser;
mod pretty;
mod token;

pub use ast::{format_number, BinOp, Constant, Expr, Name, UnOp, GLOBAL_BINDER};
pub use desugar::{desugar, desugar_in_scope};
pub use error::{DesugarError, LexError, ParseError, SyntaxError};
pub use parser::{parse, parse_prefix};
pub use pretty::pretty_print;
pub use token::{escape, is_identifier, tokenize, unescape, Position, Token, TokenKind, KEYWORDS};

/// Tokenizes and parses `src` without desugaring.
pub fn parse_str(src: &str) -> Result<Expr, SyntaxError> {
    Ok(parse(&tokenize(src)?)?)
}

/// Tokenizes, parses and desugars a top-level program.
pub fn parse_program(src: &str) -> Result<Expr, SyntaxError> {
    Ok(desugar(&parse_str(src)?, None)?)
}
