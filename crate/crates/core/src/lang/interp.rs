// SPDX-License-Identifier: Apache-2.0

//! Tree-walking evaluator with a step budget and line coverage.
//!
//! Cost model: every executed statement costs one step (a `while` is
//! re-executed, and charged, on each condition check) and every evaluated
//! binary operation costs one step. Integer arithmetic wraps; `/` and `%`
//! truncate and trap on a zero divisor.
//!
//! A line is covered when a statement or expression anchored on it is
//! reached, and a function's header line is covered on entry.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::ast::*;
use super::typeck::TypedUnit;
use super::value::{Outcome, TrapKind, Value};

pub const DEFAULT_STEP_BUDGET: u64 = 100_000;

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ExecutionTrace {
    pub covered_lines: BTreeSet<u32>,
    pub steps_used: u64,
}

/// Caller bugs, as opposed to [`Outcome::Trap`]s which are program behavior.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CallError {
    #[error("unknown function `{0}`")]
    UnknownFunction(String),
    #[error("`{function}` expects {expected}, got {got}")]
    ArityOrTypeMismatch {
        function: String,
        expected: String,
        got: String,
    },
}

impl CallError {
    pub fn code(&self) -> &'static str {
        match self {
            CallError::UnknownFunction(_) => "UNKNOWN_FUNCTION",
            CallError::ArityOrTypeMismatch { .. } => "ARITY_OR_TYPE_MISMATCH",
        }
    }
}

/// Checks that `function` exists and `args` match its parameter types.
pub fn check_call(unit: &TypedUnit, function: &str, args: &[Value]) -> Result<(), CallError> {
    let f = unit
        .function(function)
        .ok_or_else(|| CallError::UnknownFunction(function.to_string()))?;
    let ok = f.params.len() == args.len() && f.params.iter().zip(args).all(|(p, a)| p.ty == a.ty());
    if ok {
        return Ok(());
    }
    let got: Vec<String> = args.iter().map(|a| a.ty().to_string()).collect();
    Err(CallError::ArityOrTypeMismatch {
        function: function.to_string(),
        expected: f.signature().to_string(),
        got: format!("({})", got.join(", ")),
    })
}

/// Runs `function(args)` with at most `budget` steps.
pub fn evaluate_call(
    unit: &TypedUnit,
    function: &str,
    args: &[Value],
    budget: u64,
) -> Result<(Outcome, ExecutionTrace), CallError> {
    check_call(unit, function, args)?;
    let f = unit.function(function).expect("checked above");
    let mut m = Machine {
        budget,
        steps: 0,
        covered: vec![false; unit.line_count() as usize + 2],
        unit,
    };
    let outcome = match m.call(f, args.to_vec()) {
        Ok(v) => Outcome::Value(v),
        Err(k) => Outcome::Trap(k),
    };
    let covered_lines = m
        .covered
        .iter()
        .enumerate()
        .filter(|(_, c)| **c)
        .map(|(i, _)| i as u32)
        .collect();
    Ok((
        outcome,
        ExecutionTrace {
            covered_lines,
            steps_used: m.steps,
        },
    ))
}

type Exec<T> = Result<T, TrapKind>;

enum Flow {
    Next,
    Return(Value),
}

struct Frame<'u> {
    vars: Vec<(&'u str, Value)>,
    marks: Vec<usize>,
}

impl<'u> Frame<'u> {
    fn get(&self, name: &str) -> &Value {
        self.vars
            .iter()
            .rev()
            .find(|(n, _)| *n == name)
            .map(|(_, v)| v)
            .expect("typechecked variable in scope")
    }

    fn get_mut(&mut self, name: &str) -> &mut Value {
        self.vars
            .iter_mut()
            .rev()
            .find(|(n, _)| *n == name)
            .map(|(_, v)| v)
            .expect("typechecked variable in scope")
    }

    fn push_scope(&mut self) {
        self.marks.push(self.vars.len());
    }

    fn pop_scope(&mut self) {
        let m = self.marks.pop().expect("balanced scopes");
        self.vars.truncate(m);
    }
}

struct Machine<'u> {
    unit: &'u TypedUnit,
    budget: u64,
    steps: u64,
    covered: Vec<bool>,
}

// Recursion depth is bounded only by the step budget, so grow the native
// stack on demand at every MiniLang call.
const RED_ZONE: usize = 128 * 1024;
const STACK_CHUNK: usize = 4 * 1024 * 1024;

impl<'u> Machine<'u> {
    fn charge(&mut self) -> Exec<()> {
        if self.steps >= self.budget {
            return Err(TrapKind::StepBudgetExceeded);
        }
        self.steps += 1;
        Ok(())
    }

    fn cover(&mut self, line: u32) {
        if let Some(slot) = self.covered.get_mut(line as usize) {
            *slot = true;
        }
    }

    fn call(&mut self, f: &'u FunctionDecl, args: Vec<Value>) -> Exec<Value> {
        stacker::maybe_grow(RED_ZONE, STACK_CHUNK, || {
            self.cover(f.header_line());
            let mut frame = Frame {
                vars: f.params.iter().map(|p| p.name.as_str()).zip(args).collect(),
                marks: Vec::new(),
            };
            match self.block(&f.body, &mut frame)? {
                Flow::Return(v) => Ok(v),
                Flow::Next => unreachable!("typechecker guarantees every path returns"),
            }
        })
    }

    fn block(&mut self, b: &'u Block, frame: &mut Frame<'u>) -> Exec<Flow> {
        frame.push_scope();
        let mut flow = Ok(Flow::Next);
        for s in &b.stmts {
            flow = self.stmt(s, frame);
            if !matches!(flow, Ok(Flow::Next)) {
                break;
            }
        }
        frame.pop_scope();
        flow
    }

    fn stmt(&mut self, s: &'u Stmt, frame: &mut Frame<'u>) -> Exec<Flow> {
        self.cover(s.line());
        self.charge()?;
        match &s.kind {
            StmtKind::VarDecl { name, init, .. } => {
                let v = self.expr(init, frame)?;
                frame.vars.push((name.as_str(), v));
            }
            StmtKind::Assign { name, value } => {
                let v = self.expr(value, frame)?;
                *frame.get_mut(name) = v;
            }
            StmtKind::ArrayAssign { name, index, value } => {
                let i = self.int(index, frame)?;
                let v = self.int(value, frame)?;
                let Value::IntArray(xs) = frame.get_mut(name) else {
                    unreachable!("typechecked array")
                };
                let slot = usize::try_from(i)
                    .ok()
                    .and_then(|i| xs.get_mut(i))
                    .ok_or(TrapKind::IndexOutOfBounds)?;
                *slot = v;
            }
            StmtKind::If {
                cond,
                then_block,
                else_block,
            } => {
                if self.bool(cond, frame)? {
                    return self.block(then_block, frame);
                } else if let Some(b) = else_block {
                    return self.block(b, frame);
                }
            }
            StmtKind::While { cond, body } => {
                // The first check was charged above; later checks re-execute
                // the statement.
                loop {
                    if !self.bool(cond, frame)? {
                        break;
                    }
                    if let Flow::Return(v) = self.block(body, frame)? {
                        return Ok(Flow::Return(v));
                    }
                    self.cover(s.line());
                    self.charge()?;
                }
            }
            StmtKind::Return(e) => return Ok(Flow::Return(self.expr(e, frame)?)),
        }
        Ok(Flow::Next)
    }

    fn int(&mut self, e: &'u Expr, frame: &mut Frame<'u>) -> Exec<i64> {
        match self.expr(e, frame)? {
            Value::Int(v) => Ok(v),
            _ => unreachable!("typechecked int"),
        }
    }

    fn bool(&mut self, e: &'u Expr, frame: &mut Frame<'u>) -> Exec<bool> {
        match self.expr(e, frame)? {
            Value::Bool(v) => Ok(v),
            _ => unreachable!("typechecked bool"),
        }
    }

    fn expr(&mut self, e: &'u Expr, frame: &mut Frame<'u>) -> Exec<Value> {
        self.cover(e.anchor.line);
        Ok(match &e.kind {
            ExprKind::Int(v) => Value::Int(*v),
            ExprKind::Bool(b) => Value::Bool(*b),
            ExprKind::Var(n) => frame.get(n).clone(),
            ExprKind::Array(items) => {
                let mut xs = Vec::with_capacity(items.len());
                for it in items {
                    xs.push(self.int(it, frame)?);
                }
                Value::IntArray(xs)
            }
            ExprKind::Index { base, index } => {
                if let ExprKind::Var(n) = &base.kind {
                    // Avoid cloning the array for the common `xs[i]` shape.
                    self.cover(base.anchor.line);
                    let i = self.int(index, frame)?;
                    let Value::IntArray(xs) = frame.get(n) else {
                        unreachable!("typechecked array")
                    };
                    Value::Int(index_into(xs, i)?)
                } else {
                    let Value::IntArray(xs) = self.expr(base, frame)? else {
                        unreachable!("typechecked array")
                    };
                    let i = self.int(index, frame)?;
                    Value::Int(index_into(&xs, i)?)
                }
            }
            ExprKind::Unary { op, operand } => match op {
                UnaryOp::Neg => Value::Int(self.int(operand, frame)?.wrapping_neg()),
                UnaryOp::Not => Value::Bool(!self.bool(operand, frame)?),
            },
            ExprKind::Binary { op, lhs, rhs } => {
                self.charge()?;
                self.binary(*op, lhs, rhs, frame)?
            }
            ExprKind::Call { callee, args } => {
                let mut vals = Vec::with_capacity(args.len());
                for a in args {
                    vals.push(self.expr(a, frame)?);
                }
                let f = self.unit.function(callee).expect("typechecked callee");
                self.call(f, vals)?
            }
        })
    }

    fn binary(
        &mut self,
        op: BinaryOp,
        lhs: &'u Expr,
        rhs: &'u Expr,
        frame: &mut Frame<'u>,
    ) -> Exec<Value> {
        match op {
            BinaryOp::And => {
                return Ok(Value::Bool(self.bool(lhs, frame)? && self.bool(rhs, frame)?))
            }
            BinaryOp::Or => {
                return Ok(Value::Bool(self.bool(lhs, frame)? || self.bool(rhs, frame)?))
            }
            BinaryOp::Eq | BinaryOp::Ne => {
                let l = self.expr(lhs, frame)?;
                let r = self.expr(rhs, frame)?;
                return Ok(Value::Bool((l == r) == (op == BinaryOp::Eq)));
            }
            _ => {}
        }
        let l = self.int(lhs, frame)?;
        let r = self.int(rhs, frame)?;
        Ok(match op {
            BinaryOp::Add => Value::Int(l.wrapping_add(r)),
            BinaryOp::Sub => Value::Int(l.wrapping_sub(r)),
            BinaryOp::Mul => Value::Int(l.wrapping_mul(r)),
            BinaryOp::Div => {
                if r == 0 {
                    return Err(TrapKind::DivByZero);
                }
                Value::Int(l.wrapping_div(r))
            }
            BinaryOp::Rem => {
                if r == 0 {
                    return Err(TrapKind::ModByZero);
                }
                Value::Int(l.wrapping_rem(r))
            }
            BinaryOp::Lt => Value::Bool(l < r),
            BinaryOp::Le => Value::Bool(l <= r),
            BinaryOp::Gt => Value::Bool(l > r),
            BinaryOp::Ge => Value::Bool(l >= r),
            BinaryOp::Eq | BinaryOp::Ne | BinaryOp::And | BinaryOp::Or => unreachable!(),
        })
    }
}

fn index_into(xs: &[i64], i: i64) -> Exec<i64> {
    usize::try_from(i)
        .ok()
        .and_then(|i| xs.get(i).copied())
        .ok_or(TrapKind::IndexOutOfBounds)
}
