// SPDX-License-Identifier: Apache-2.0

//! Top-down tree comparison used to size attacker edits.
//!
//! Both units are lowered to a uniform tree where only statements,
//! expressions and parameters count as nodes; blocks and argument lists are
//! sequences. Comparison rules:
//!
//! * equal kind, equal label: recurse into children, cost 0 for the node;
//! * equal kind, different label (operator, literal, name): cost 1 at the
//!   node's anchor line, then recurse;
//! * different kind: cost = node count of the replacement subtree (min 1),
//!   edited lines = every line the original node spans;
//! * sequences: strip the longest common prefix and suffix of structurally
//!   equal elements, pair the rest position-wise, charge leftover old
//!   elements 1 each (deletion) and leftover new elements their size
//!   (insertion, also marking the owning node's anchor line).

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::lang::ast::*;
use crate::lang::TypedUnit;

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct AstEditSummary {
    pub edited_node_count: u32,
    pub edited_lines: BTreeSet<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Param,
    VarDecl,
    Assign,
    ArrayAssign,
    If,
    While,
    Return,
    Int,
    Bool,
    Var,
    Array,
    Index,
    Unary,
    Binary,
    Call,
}

#[derive(Debug)]
enum Child {
    Node(TNode),
    Seq(Vec<TNode>),
    Opt(Option<Vec<TNode>>),
}

#[derive(Debug)]
struct TNode {
    kind: Kind,
    label: String,
    anchor_line: u32,
    first_line: u32,
    last_line: u32,
    children: Vec<Child>,
}

impl TNode {
    fn size(&self) -> u32 {
        1 + self
            .children
            .iter()
            .map(|c| match c {
                Child::Node(n) => n.size(),
                Child::Seq(v) | Child::Opt(Some(v)) => v.iter().map(TNode::size).sum(),
                Child::Opt(None) => 0,
            })
            .sum::<u32>()
    }

    fn span_lines(&self, out: &mut BTreeSet<u32>) {
        out.extend(self.first_line..=self.last_line.max(self.first_line));
    }

    fn same_shape(&self, other: &TNode) -> bool {
        self.kind == other.kind
            && self.label == other.label
            && self.children.len() == other.children.len()
            && self
                .children
                .iter()
                .zip(&other.children)
                .all(|(a, b)| match (a, b) {
                    (Child::Node(x), Child::Node(y)) => x.same_shape(y),
                    (Child::Seq(x), Child::Seq(y)) => seq_same(x, y),
                    (Child::Opt(x), Child::Opt(y)) => match (x, y) {
                        (None, None) => true,
                        (Some(x), Some(y)) => seq_same(x, y),
                        _ => false,
                    },
                    _ => false,
                })
    }
}

fn seq_same(a: &[TNode], b: &[TNode]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.same_shape(y))
}

fn node(kind: Kind, label: String, anchor_line: u32, span: Span, children: Vec<Child>) -> TNode {
    TNode {
        kind,
        label,
        anchor_line,
        first_line: span.line,
        last_line: span.end_line,
        children,
    }
}

fn lower_block(b: &Block) -> Vec<TNode> {
    b.stmts.iter().map(lower_stmt).collect()
}

fn lower_stmt(s: &Stmt) -> TNode {
    let line = s.line();
    let (kind, label, children) = match &s.kind {
        StmtKind::VarDecl { name, ty, init } => (
            Kind::VarDecl,
            format!("{name}:{ty}"),
            vec![Child::Node(lower_expr(init))],
        ),
        StmtKind::Assign { name, value } => (
            Kind::Assign,
            name.clone(),
            vec![Child::Node(lower_expr(value))],
        ),
        StmtKind::ArrayAssign { name, index, value } => (
            Kind::ArrayAssign,
            name.clone(),
            vec![Child::Node(lower_expr(index)), Child::Node(lower_expr(value))],
        ),
        StmtKind::If {
            cond,
            then_block,
            else_block,
        } => (
            Kind::If,
            String::new(),
            vec![
                Child::Node(lower_expr(cond)),
                Child::Seq(lower_block(then_block)),
                Child::Opt(else_block.as_ref().map(lower_block)),
            ],
        ),
        StmtKind::While { cond, body } => (
            Kind::While,
            String::new(),
            vec![Child::Node(lower_expr(cond)), Child::Seq(lower_block(body))],
        ),
        StmtKind::Return(e) => (Kind::Return, String::new(), vec![Child::Node(lower_expr(e))]),
    };
    node(kind, label, line, s.span, children)
}

fn lower_expr(e: &Expr) -> TNode {
    let (kind, label, children) = match &e.kind {
        ExprKind::Int(v) => (Kind::Int, v.to_string(), vec![]),
        ExprKind::Bool(b) => (Kind::Bool, b.to_string(), vec![]),
        ExprKind::Var(n) => (Kind::Var, n.clone(), vec![]),
        ExprKind::Array(items) => (
            Kind::Array,
            String::new(),
            vec![Child::Seq(items.iter().map(lower_expr).collect())],
        ),
        ExprKind::Index { base, index } => (
            Kind::Index,
            String::new(),
            vec![Child::Node(lower_expr(base)), Child::Node(lower_expr(index))],
        ),
        ExprKind::Unary { op, operand } => (
            Kind::Unary,
            op.symbol().to_string(),
            vec![Child::Node(lower_expr(operand))],
        ),
        ExprKind::Binary { op, lhs, rhs } => (
            Kind::Binary,
            op.symbol().to_string(),
            vec![Child::Node(lower_expr(lhs)), Child::Node(lower_expr(rhs))],
        ),
        ExprKind::Call { callee, args } => (
            Kind::Call,
            callee.clone(),
            vec![Child::Seq(args.iter().map(lower_expr).collect())],
        ),
    };
    node(kind, label, e.anchor.line, e.span, children)
}

fn lower_params(f: &FunctionDecl) -> Vec<TNode> {
    f.params
        .iter()
        .map(|p| node(Kind::Param, format!("{}:{}", p.name, p.ty), p.span.line, p.span, vec![]))
        .collect()
}

#[derive(Default)]
struct Acc {
    count: u32,
    lines: BTreeSet<u32>,
}

impl Acc {
    fn compare(&mut self, old: &TNode, new: &TNode) {
        if old.kind != new.kind {
            self.count += new.size().max(1);
            old.span_lines(&mut self.lines);
            return;
        }
        if old.label != new.label {
            self.count += 1;
            self.lines.insert(old.anchor_line);
        }
        for (a, b) in old.children.iter().zip(&new.children) {
            match (a, b) {
                (Child::Node(x), Child::Node(y)) => self.compare(x, y),
                (Child::Seq(x), Child::Seq(y)) => self.sequence(x, y, old.anchor_line),
                (Child::Opt(x), Child::Opt(y)) => match (x, y) {
                    (None, None) => {}
                    (Some(x), Some(y)) => self.sequence(x, y, old.anchor_line),
                    (Some(x), None) => self.sequence(x, &[], old.anchor_line),
                    (None, Some(y)) => {
                        // A new else branch edits the `if` itself.
                        self.sequence(&[], y, old.anchor_line);
                        self.lines.insert(old.anchor_line);
                        if y.is_empty() {
                            self.count += 1;
                        }
                    }
                },
                _ => unreachable!("equal kinds have equal child layouts"),
            }
        }
    }

    fn sequence(&mut self, old: &[TNode], new: &[TNode], owner_line: u32) {
        let mut prefix = 0;
        while prefix < old.len() && prefix < new.len() && old[prefix].same_shape(&new[prefix]) {
            prefix += 1;
        }
        let mut suffix = 0;
        while suffix < old.len() - prefix
            && suffix < new.len() - prefix
            && old[old.len() - 1 - suffix].same_shape(&new[new.len() - 1 - suffix])
        {
            suffix += 1;
        }
        let old_mid = &old[prefix..old.len() - suffix];
        let new_mid = &new[prefix..new.len() - suffix];
        for (x, y) in old_mid.iter().zip(new_mid) {
            self.compare(x, y);
        }
        for x in old_mid.iter().skip(new_mid.len()) {
            self.count += 1;
            x.span_lines(&mut self.lines);
        }
        for y in new_mid.iter().skip(old_mid.len()) {
            self.count += y.size().max(1);
            y.span_lines(&mut self.lines);
            self.lines.insert(owner_line);
        }
    }
}

/// Sizes the edit from `original` to `edited`. Functions are matched by
/// name; functions present on only one side are ignored (validation rejects
/// such edits before this runs).
pub fn ast_edit_summary(original: &TypedUnit, edited: &TypedUnit) -> AstEditSummary {
    summarize_units(original.unit(), edited.unit())
}

pub(crate) fn summarize_units(original: &SourceUnit, edited: &SourceUnit) -> AstEditSummary {
    let mut acc = Acc::default();
    for f in &original.functions {
        let Some(g) = edited.function(&f.name) else {
            continue;
        };
        let line = f.header_line();
        acc.sequence(&lower_params(f), &lower_params(g), line);
        acc.sequence(&lower_block(&f.body), &lower_block(&g.body), line);
    }
    AstEditSummary {
        edited_node_count: acc.count,
        edited_lines: acc.lines,
    }
}
