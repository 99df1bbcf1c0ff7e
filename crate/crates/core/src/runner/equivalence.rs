// SPDX-License-Identifier: Apache-2.0

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lang::ast::FunctionDecl;
use crate::lang::{evaluate_call, CallError, Outcome, Type, TypedUnit, Value};

pub const MAX_DOMAIN_SIZE: u64 = 1_000_000;

/// Values tried for one parameter.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ParamDomain {
    Int { lo: i64, hi: i64 },
    Bool,
    IntArray { max_len: u32, lo: i64, hi: i64 },
}

impl ParamDomain {
    fn size(&self) -> Option<u64> {
        match *self {
            ParamDomain::Int { lo, hi } => Some(range_width(lo, hi)),
            ParamDomain::Bool => Some(2),
            ParamDomain::IntArray { max_len, lo, hi } => {
                let w = range_width(lo, hi);
                let mut total: u64 = 0;
                let mut layer: u64 = 1;
                for _ in 0..=max_len {
                    total = total.checked_add(layer)?;
                    layer = layer.checked_mul(w)?;
                }
                Some(total)
            }
        }
    }

    /// The `i`-th value in ascending order (arrays: by length, then
    /// lexicographically).
    fn nth(&self, mut i: u64) -> Value {
        match *self {
            ParamDomain::Int { lo, .. } => Value::Int(lo.wrapping_add(i as i64)),
            ParamDomain::Bool => Value::Bool(i == 1),
            ParamDomain::IntArray { lo, hi, .. } => {
                let w = range_width(lo, hi);
                let mut len = 0u32;
                let mut layer = 1u64;
                while i >= layer {
                    i -= layer;
                    layer *= w;
                    len += 1;
                }
                let mut items = vec![lo; len as usize];
                for slot in items.iter_mut().rev() {
                    *slot = lo.wrapping_add((i % w) as i64);
                    i /= w;
                }
                Value::IntArray(items)
            }
        }
    }

    fn fits(&self, ty: Type) -> bool {
        matches!(
            (self, ty),
            (ParamDomain::Int { .. }, Type::Int)
                | (ParamDomain::Bool, Type::Bool)
                | (ParamDomain::IntArray { .. }, Type::IntArray)
        )
    }
}

fn range_width(lo: i64, hi: i64) -> u64 {
    if hi < lo {
        0
    } else {
        (hi as i128 - lo as i128 + 1).min(u64::MAX as i128) as u64
    }
}

impl fmt::Display for ParamDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamDomain::Int { lo, hi } => write!(f, "int [{lo}, {hi}]"),
            ParamDomain::Bool => f.write_str("bool"),
            ParamDomain::IntArray { max_len, lo, hi } => {
                write!(f, "int[] len<={max_len} elems [{lo}, {hi}]")
            }
        }
    }
}

/// Cross-product of per-parameter domains.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Domain {
    pub params: Vec<ParamDomain>,
}

impl Domain {
    pub const DEFAULT_INT: (i64, i64) = (-8, 8);

    /// Default domain for `f`: ints in [-8, 8], arrays of length at most 3
    /// with elements in [-2, 2].
    pub fn default_for(f: &FunctionDecl) -> Self {
        Self::with_int_range(f, Self::DEFAULT_INT.0, Self::DEFAULT_INT.1)
    }

    pub fn with_int_range(f: &FunctionDecl, lo: i64, hi: i64) -> Self {
        let params = f
            .params
            .iter()
            .map(|p| match p.ty {
                Type::Int => ParamDomain::Int { lo, hi },
                Type::Bool => ParamDomain::Bool,
                Type::IntArray => ParamDomain::IntArray {
                    max_len: 3,
                    lo: -2,
                    hi: 2,
                },
            })
            .collect();
        Domain { params }
    }

    /// Number of argument tuples, or `None` on overflow.
    pub fn size(&self) -> Option<u64> {
        self.params
            .iter()
            .try_fold(1u64, |acc, p| acc.checked_mul(p.size()?))
    }

    /// The `i`-th tuple in lexicographic order, first parameter outermost.
    pub fn tuple(&self, mut i: u64) -> Vec<Value> {
        let mut out = vec![Value::Int(0); self.params.len()];
        for (slot, p) in out.iter_mut().zip(&self.params).rev() {
            let n = p.size().expect("size checked");
            *slot = p.nth(i % n);
            i /= n;
        }
        out
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.params.iter().map(ToString::to_string).collect();
        write!(f, "({})", parts.join(") x ("))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum EquivalenceVerdict {
    Equivalent {
        domain: String,
        tuples_checked: u64,
    },
    Counterexample {
        #[serde(rename = "fn")]
        function: String,
        args: Vec<Value>,
        original: Outcome,
        mutant: Outcome,
    },
}

impl EquivalenceVerdict {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, EquivalenceVerdict::Equivalent { .. })
    }
}

impl fmt::Display for EquivalenceVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EquivalenceVerdict::Equivalent {
                domain,
                tuples_checked,
            } => write!(f, "Equivalent over {domain} ({tuples_checked} tuples)"),
            EquivalenceVerdict::Counterexample {
                function,
                args,
                original,
                mutant,
            } => {
                let args: Vec<String> = args.iter().map(ToString::to_string).collect();
                write!(
                    f,
                    "Counterexample {function}({}): original {original}, mutant {mutant}",
                    args.join(", ")
                )
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EquivalenceError {
    #[error("domain has {} tuples, limit is {limit}", size.map_or("too many".to_string(), |n| n.to_string()))]
    DomainTooLarge { size: Option<u64>, limit: u64 },
    #[error("domain does not match the parameters of `{0}`")]
    DomainMismatch(String),
    #[error(transparent)]
    Call(#[from] CallError),
}

impl EquivalenceError {
    pub fn code(&self) -> &'static str {
        match self {
            EquivalenceError::DomainTooLarge { .. } => "DOMAIN_TOO_LARGE",
            EquivalenceError::DomainMismatch(_) => "DOMAIN_MISMATCH",
            EquivalenceError::Call(e) => e.code(),
        }
    }
}

/// Evaluates `function` on every tuple of `domain` in both units and
/// returns the lexicographically first tuple whose outcomes differ.
pub fn bounded_equivalence_oracle(
    original: &TypedUnit,
    mutant: &TypedUnit,
    function: &str,
    domain: &Domain,
    budget: u64,
) -> Result<EquivalenceVerdict, EquivalenceError> {
    let f = original
        .function(function)
        .ok_or_else(|| CallError::UnknownFunction(function.to_string()))?;
    if f.params.len() != domain.params.len()
        || !f.params.iter().zip(&domain.params).all(|(p, d)| d.fits(p.ty))
    {
        return Err(EquivalenceError::DomainMismatch(function.to_string()));
    }
    let size = domain.size();
    let total = match size {
        Some(n) if n <= MAX_DOMAIN_SIZE => n,
        _ => {
            return Err(EquivalenceError::DomainTooLarge {
                size,
                limit: MAX_DOMAIN_SIZE,
            })
        }
    };
    // Surface signature problems on the mutant before the parallel scan.
    if total > 0 {
        evaluate_call(mutant, function, &domain.tuple(0), 0)?;
    }
    let found = (0..total).into_par_iter().find_map_first(|i| {
        let args = domain.tuple(i);
        let a = evaluate_call(original, function, &args, budget).ok()?.0;
        let b = evaluate_call(mutant, function, &args, budget).ok()?.0;
        (a != b).then_some((args, a, b))
    });
    Ok(match found {
        Some((args, original, mutant)) => EquivalenceVerdict::Counterexample {
            function: function.to_string(),
            args,
            original,
            mutant,
        },
        None => EquivalenceVerdict::Equivalent {
            domain: domain.to_string(),
            tuples_checked: total,
        },
    })
}
