// SPDX-License-Identifier: Apache-2.0

use std::collections::HashSet;

use serde::Serialize;

use super::MutationOperator;
use crate::lang::ast::*;
use crate::lang::{compile, print_unit, Type, TypedUnit};

/// One operator application, ready to be submitted as an edited source.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MutantCandidate {
    pub operator: MutationOperator,
    pub site: Pos,
    pub original_fragment: String,
    pub mutated_fragment: String,
    pub mutated_source: String,
}

/// Values a CRP site is rewritten to: `c+1`, `c-1`, `0`, skipping the
/// unchanged value and repeats (so literals 0 and 1 yield two each).
pub fn crp_replacements(c: i64) -> Vec<i64> {
    let mut out = Vec::with_capacity(3);
    for v in [c.checked_add(1), c.checked_sub(1), Some(0)].into_iter().flatten() {
        if v != c && !out.contains(&v) {
            out.push(v);
        }
    }
    out
}

/// Enumerates candidates in AST preorder; at each node, operators run in
/// declaration order and replacements in their listed order. Candidates that
/// fail to typecheck (only possible for SDL) or that duplicate an earlier
/// candidate's tree are dropped.
pub fn enumerate_mutants(unit: &TypedUnit, ops: &[MutationOperator]) -> Vec<MutantCandidate> {
    let mut ops: Vec<MutationOperator> = ops.to_vec();
    ops.sort();
    ops.dedup();
    let mut e = Enumerator {
        unit,
        src: unit.source(),
        lines: LineIndex::new(unit.source()),
        ops,
        out: Vec::new(),
        seen: HashSet::new(),
    };
    e.seen.insert(print_unit(unit.unit()));
    for f in unit.functions() {
        e.block(&f.body);
    }
    e.out
}

struct LineIndex {
    starts: Vec<usize>,
}

impl LineIndex {
    fn new(src: &str) -> Self {
        let mut starts = vec![0];
        starts.extend(src.match_indices('\n').map(|(i, _)| i + 1));
        LineIndex { starts }
    }

    fn offset(&self, src: &str, pos: Pos) -> usize {
        let start = self.starts[pos.line as usize - 1];
        src[start..]
            .char_indices()
            .nth(pos.col as usize - 1)
            .map(|(i, _)| start + i)
            .unwrap_or(src.len())
    }
}

struct Enumerator<'a> {
    unit: &'a TypedUnit,
    src: &'a str,
    lines: LineIndex,
    ops: Vec<MutationOperator>,
    out: Vec<MutantCandidate>,
    seen: HashSet<String>,
}

fn squash(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

impl Enumerator<'_> {
    fn wants(&self, op: MutationOperator) -> bool {
        self.ops.contains(&op)
    }

    fn emit(&mut self, operator: MutationOperator, site: Pos, range: (usize, usize), replacement: &str) {
        let mut mutated = String::with_capacity(self.src.len() + replacement.len());
        mutated.push_str(&self.src[..range.0]);
        mutated.push_str(replacement);
        mutated.push_str(&self.src[range.1..]);
        let Ok(typed) = compile(&mutated) else {
            return;
        };
        if !self.seen.insert(print_unit(typed.unit())) {
            return;
        }
        self.out.push(MutantCandidate {
            operator,
            site,
            original_fragment: squash(&self.src[range.0..range.1]),
            mutated_fragment: squash(replacement),
            mutated_source: mutated,
        });
    }

    fn block(&mut self, b: &Block) {
        for s in &b.stmts {
            self.stmt(s);
        }
    }

    fn stmt(&mut self, s: &Stmt) {
        if self.wants(MutationOperator::Sdl) && !matches!(s.kind, StmtKind::Return(_)) {
            // Keep line numbers stable: the deleted text becomes its newlines.
            let text = &self.src[s.span.start..s.span.end];
            let blank: String = text.chars().filter(|&c| c == '\n').collect();
            let site = Pos {
                line: s.span.line,
                col: s.span.col,
            };
            self.emit(MutationOperator::Sdl, site, (s.span.start, s.span.end), &blank);
        }
        match &s.kind {
            StmtKind::VarDecl { init, .. } => self.expr(init),
            StmtKind::Assign { value, .. } => self.expr(value),
            StmtKind::ArrayAssign { index, value, .. } => {
                self.expr(index);
                self.expr(value);
            }
            StmtKind::If {
                cond,
                then_block,
                else_block,
            } => {
                self.expr(cond);
                self.block(then_block);
                if let Some(b) = else_block {
                    self.block(b);
                }
            }
            StmtKind::While { cond, body } => {
                self.expr(cond);
                self.block(body);
            }
            StmtKind::Return(e) => self.expr(e),
        }
    }

    fn expr(&mut self, e: &Expr) {
        match &e.kind {
            ExprKind::Binary { op, lhs, rhs } => {
                self.binary(e, *op, lhs);
                self.expr(lhs);
                self.expr(rhs);
            }
            ExprKind::Int(c) => {
                self.uoi(e);
                if self.wants(MutationOperator::Crp) {
                    for v in crp_replacements(*c) {
                        self.emit(
                            MutationOperator::Crp,
                            e.anchor,
                            (e.span.start, e.span.end),
                            &v.to_string(),
                        );
                    }
                }
            }
            ExprKind::Bool(_) | ExprKind::Var(_) => self.uoi(e),
            ExprKind::Index { base, index } => {
                self.uoi(e);
                self.expr(base);
                self.expr(index);
            }
            ExprKind::Call { args, .. } => {
                self.uoi(e);
                args.iter().for_each(|a| self.expr(a));
            }
            ExprKind::Array(items) => items.iter().for_each(|a| self.expr(a)),
            ExprKind::Unary { operand, .. } => self.expr(operand),
        }
    }

    fn binary(&mut self, e: &Expr, op: BinaryOp, lhs: &Expr) {
        let start = self.lines.offset(self.src, e.anchor);
        let range = (start, start + op.symbol().len());
        let alternatives: &[BinaryOp] = if op.is_arithmetic() {
            if !self.wants(MutationOperator::Aor) {
                return;
            }
            &BinaryOp::ARITHMETIC
        } else if op.is_relational() && self.unit.type_of(lhs) == Type::Int {
            if !self.wants(MutationOperator::Ror) {
                return;
            }
            &BinaryOp::RELATIONAL
        } else if op.is_logical() {
            if !self.wants(MutationOperator::Lor) {
                return;
            }
            &BinaryOp::LOGICAL
        } else {
            return;
        };
        let operator = if op.is_arithmetic() {
            MutationOperator::Aor
        } else if op.is_logical() {
            MutationOperator::Lor
        } else {
            MutationOperator::Ror
        };
        for alt in alternatives.iter().copied().filter(|&a| a != op) {
            self.emit(operator, e.anchor, range, alt.symbol());
        }
    }

    /// Negates an atomic int operand or inverts an atomic bool operand.
    fn uoi(&mut self, e: &Expr) {
        if !self.wants(MutationOperator::Uoi) {
            return;
        }
        let prefix = match self.unit.type_of(e) {
            Type::Int => "-",
            Type::Bool => "!",
            Type::IntArray => return,
        };
        let text = &self.src[e.span.start..e.span.end];
        let replacement = format!("{prefix}{text}");
        self.emit(
            MutationOperator::Uoi,
            e.anchor,
            (e.span.start, e.span.end),
            &replacement,
        );
    }
}
