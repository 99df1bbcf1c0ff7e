// SPDX-License-Identifier: Apache-2.0

//! Mutant generation and validation of attacker edits.

pub mod diff;
mod enumerate;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use diff::{ast_edit_summary, AstEditSummary};
pub use enumerate::{crp_replacements, enumerate_mutants, MutantCandidate};

use crate::lang::{
    compile, CompileError, ParseError, SharedUnit, SyntaxError, TypeError, TypedUnit,
};

/// Mutation operators, in enumeration order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum MutationOperator {
    /// Arithmetic operator replacement within `+ - * / %`.
    Aor,
    /// Relational operator replacement within `< <= > >= == !=` on ints.
    Ror,
    /// `&&` and `||` swap.
    Lor,
    /// Unary `-`/`!` inserted before an atomic operand.
    Uoi,
    /// Integer literal `c` to `c+1`, `c-1`, `0`.
    Crp,
    /// Deletion of one non-return statement.
    Sdl,
}

impl MutationOperator {
    pub const ALL: [MutationOperator; 6] = [
        MutationOperator::Aor,
        MutationOperator::Ror,
        MutationOperator::Lor,
        MutationOperator::Uoi,
        MutationOperator::Crp,
        MutationOperator::Sdl,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MutationOperator::Aor => "AOR",
            MutationOperator::Ror => "ROR",
            MutationOperator::Lor => "LOR",
            MutationOperator::Uoi => "UOI",
            MutationOperator::Crp => "CRP",
            MutationOperator::Sdl => "SDL",
        }
    }

    /// Parses a comma-separated list such as `AOR,ROR`.
    pub fn parse_list(list: &str) -> Result<Vec<MutationOperator>, UnknownOperator> {
        list.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::parse)
            .collect()
    }
}

impl fmt::Display for MutationOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown mutation operator `{0}`")]
pub struct UnknownOperator(pub String);

impl FromStr for MutationOperator {
    type Err = UnknownOperator;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MutationOperator::ALL
            .into_iter()
            .find(|op| op.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| UnknownOperator(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MutantLimits {
    pub max_edited_nodes: u32,
}

impl Default for MutantLimits {
    fn default() -> Self {
        MutantLimits {
            max_edited_nodes: 5,
        }
    }
}

/// An accepted attacker edit.
#[derive(Debug, Clone)]
pub struct Mutant {
    pub unit: SharedUnit,
    pub summary: AstEditSummary,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValidationError {
    #[error("syntax error at {0}")]
    Syntax(SyntaxError),
    #[error("source is {size} bytes, limit is {limit}")]
    SourceTooLarge { size: usize, limit: usize },
    #[error("{} type error(s); first: {}", .0.len(), .0[0])]
    Type(Vec<TypeError>),
    #[error("signature of `{function}` changed")]
    SignatureChanged { function: String },
    #[error("functions added {added:?} or removed {removed:?}")]
    FunctionAddedOrRemoved {
        added: Vec<String>,
        removed: Vec<String>,
    },
    #[error("edit is identical to the original")]
    IdenticalToOriginal,
    #[error("edit touches {count} nodes, limit is {limit}")]
    EditTooLarge { count: u32, limit: u32 },
}

impl ValidationError {
    pub fn code(&self) -> &'static str {
        match self {
            ValidationError::Syntax(_) => "SYNTAX_ERROR",
            ValidationError::SourceTooLarge { .. } => "SOURCE_TOO_LARGE",
            ValidationError::Type(_) => "TYPE_ERROR",
            ValidationError::SignatureChanged { .. } => "SIGNATURE_CHANGED",
            ValidationError::FunctionAddedOrRemoved { .. } => "FUNCTION_ADDED_OR_REMOVED",
            ValidationError::IdenticalToOriginal => "IDENTICAL_TO_ORIGINAL",
            ValidationError::EditTooLarge { .. } => "EDIT_TOO_LARGE",
        }
    }

    /// Source line the error points at, if any.
    pub fn line(&self) -> Option<u32> {
        match self {
            ValidationError::Syntax(e) => Some(e.line),
            ValidationError::Type(errs) => errs.first().map(|e| e.line),
            _ => None,
        }
    }
}

impl From<CompileError> for ValidationError {
    fn from(e: CompileError) -> Self {
        match e {
            CompileError::Parse(ParseError::Syntax(s)) => ValidationError::Syntax(s),
            CompileError::Parse(ParseError::SourceTooLarge { size, limit }) => {
                ValidationError::SourceTooLarge { size, limit }
            }
            CompileError::Type(errs) => ValidationError::Type(errs),
        }
    }
}

/// Accepts an attacker's full-file edit if it compiles, keeps the function
/// set and every signature, differs structurally from `original`, and stays
/// within the node budget.
pub fn validate_mutant_submission(
    original: &TypedUnit,
    edited_source: &str,
    limits: MutantLimits,
) -> Result<Mutant, ValidationError> {
    let edited = compile(edited_source)?;
    let removed: Vec<String> = original
        .functions()
        .iter()
        .filter(|f| edited.function(&f.name).is_none())
        .map(|f| f.name.clone())
        .collect();
    let added: Vec<String> = edited
        .functions()
        .iter()
        .filter(|f| original.function(&f.name).is_none())
        .map(|f| f.name.clone())
        .collect();
    if !added.is_empty() || !removed.is_empty() {
        return Err(ValidationError::FunctionAddedOrRemoved { added, removed });
    }
    for f in original.functions() {
        let g = edited.function(&f.name).expect("same function set");
        if f.signature() != g.signature() {
            return Err(ValidationError::SignatureChanged {
                function: f.name.clone(),
            });
        }
    }
    let summary = ast_edit_summary(original, &edited);
    if summary.edited_node_count == 0 {
        return Err(ValidationError::IdenticalToOriginal);
    }
    if summary.edited_node_count > limits.max_edited_nodes {
        return Err(ValidationError::EditTooLarge {
            count: summary.edited_node_count,
            limit: limits.max_edited_nodes,
        });
    }
    let unit = Arc::new(edited.named(original.unit().name.clone()));
    Ok(Mutant { unit, summary })
}
