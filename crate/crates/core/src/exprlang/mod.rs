//! The scalar expression language for surface components and tmb entries.
//!
//! ```text
//! expr  := expr ('+'|'-') expr | expr ('*'|'/') expr | '-' expr
//!        | expr '^' expr | number | name | func '(' expr ')' | '(' expr ')'
//! func  := sin | cos | tan | atan | exp | log | sqrt
//! ```
//!
//! `u` and `v` are the coordinates; any other name is a parameter. `^` is
//! right-associative and binds tighter than unary minus on its left, so
//! `-u^2` is `-(u^2)`. A constant integral exponent is evaluated by repeated
//! multiplication and works for negative bases.

mod ast;
mod lexer;
mod parser;

pub use ast::{BinOp, Coord, Expr, Func, Params};
pub use lexer::{tokenize, Token, TokenKind};
pub use parser::parse;

use crate::error::Result;

/// Tokenizes and parses `source`.
pub fn parse_expr(source: &str) -> Result<Expr> {
    parse(&tokenize(source)?)
}
