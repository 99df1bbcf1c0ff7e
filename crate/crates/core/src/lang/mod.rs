// SPDX-License-Identifier: Apache-2.0

//! MiniLang: the small, deterministic language classes under test are
//! written in.
//!
//! ```text
//! unit    := { fundecl }
//! fundecl := "fun" ident "(" [ param { "," param } ] ")" "->" type block
//! param   := ident ":" type
//! type    := "int" | "bool" | "int[]"
//! block   := "{" { stmt } "}"
//! stmt    := "var" ident ":" type "=" expr ";"
//!          | ident "=" expr ";"
//!          | ident "[" expr "]" "=" expr ";"
//!          | "if" "(" expr ")" block [ "else" ( block | if ) ]
//!          | "while" "(" expr ")" block
//!          | "return" expr ";"
//! expr    := binary operators, loosest first:
//!            ||  &&  == !=  < <= > >=  + -  * / %
//! unary   := ( "-" | "!" ) unary | postfix
//! postfix := primary { "[" expr "]" }
//! primary := int | "true" | "false" | ident | ident "(" args ")"
//!          | "[" args "]" | "(" expr ")"
//! ```

pub mod ast;
pub mod interp;
mod lexer;
mod parser;
pub mod pretty;
pub mod typeck;
pub mod value;

use std::fmt;

use serde::Serialize;
use thiserror::Error;

pub use ast::{SourceUnit, Type};
pub use interp::{evaluate_call, CallError, ExecutionTrace, DEFAULT_STEP_BUDGET};
pub use parser::parse_unit;
pub use pretty::print_unit;
pub use typeck::{typecheck, SharedUnit, TypeError, TypeErrorKind, TypedUnit};
pub use value::{Outcome, TrapKind, Value};

/// Sources larger than this are rejected before lexing.
pub const MAX_SOURCE_BYTES: usize = 64 * 1024;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SyntaxError {
    pub line: u32,
    pub column: u32,
    pub message: String,
}

impl SyntaxError {
    pub fn new(line: u32, column: u32, message: impl Into<String>) -> Self {
        SyntaxError {
            line,
            column,
            message: message.into(),
        }
    }
}

impl fmt::Display for SyntaxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.message)
    }
}

impl std::error::Error for SyntaxError {}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at {0}")]
    Syntax(#[from] SyntaxError),
    #[error("source is {size} bytes, limit is {limit}")]
    SourceTooLarge { size: usize, limit: usize },
}

/// Parse or typecheck failure.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompileError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("{} type error(s); first: {}", .0.len(), .0[0])]
    Type(Vec<TypeError>),
}

impl CompileError {
    pub fn code(&self) -> &'static str {
        match self {
            CompileError::Parse(ParseError::Syntax(_)) => "SYNTAX_ERROR",
            CompileError::Parse(ParseError::SourceTooLarge { .. }) => "SOURCE_TOO_LARGE",
            CompileError::Type(_) => "TYPE_ERROR",
        }
    }

    /// Line of the first reported problem, when there is one.
    pub fn line(&self) -> Option<u32> {
        match self {
            CompileError::Parse(ParseError::Syntax(e)) => Some(e.line),
            CompileError::Parse(ParseError::SourceTooLarge { .. }) => None,
            CompileError::Type(errs) => errs.first().map(|e| e.line),
        }
    }
}

/// Parses and typechecks in one go.
pub fn compile(source: &str) -> Result<TypedUnit, CompileError> {
    let unit = parse_unit(source)?;
    typecheck(unit).map_err(CompileError::Type)
}
