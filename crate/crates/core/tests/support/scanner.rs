// SPDX-License-Identifier: Apache-2.0

//! Mutant sites found by walking the generator tree directly, as a check on
//! the production enumerator.
//!
//! AOR: each arithmetic op, 4 alternatives. ROR: each relational op whose
//! lhs is an int, 5 alternatives. LOR: each `&&`/`||`, 1. UOI: each atomic
//! non-array operand (literal, variable, index, call), 1. CRP: each literal,
//! `{c+1, c-1, 0}` minus `c` and repeats. SDL: each non-return statement,
//! unless it declares a variable used elsewhere. Identical trees count once.

use std::collections::HashSet;

use super::gen::{self, Op, Prog, Ty, ARITH, E, REL, S, SK};

#[derive(Debug, Clone)]
pub struct Mutant {
    pub operator: &'static str,
    pub prog: Prog,
    pub line: u32,
}

struct Edit<T> {
    op: &'static str,
    line: u32,
    /// Set when the edit deleted a declaration of this name.
    dropped: Option<String>,
    node: T,
}

impl<T> Edit<T> {
    fn with<U>(&self, node: U) -> Edit<U> {
        Edit {
            op: self.op,
            line: self.line,
            dropped: self.dropped.clone(),
            node,
        }
    }
}

pub fn crp_values(c: i64) -> Vec<i64> {
    let mut out = Vec::new();
    for v in [c.checked_add(1), c.checked_sub(1), Some(0)].into_iter().flatten() {
        if v != c && !out.contains(&v) {
            out.push(v);
        }
    }
    out
}

fn lit(v: i64) -> E {
    if v < 0 {
        E::Neg(Box::new(E::Int(-v)))
    } else {
        E::Int(v)
    }
}

fn expr_edits(e: &E, line: u32) -> Vec<Edit<E>> {
    let mut out = Vec::new();
    let edit = |op, node| Edit {
        op,
        line,
        dropped: None,
        node,
    };
    let atomic = matches!(e, E::Int(_) | E::Bool(_) | E::Var(..) | E::Index(..) | E::Call(..));
    if atomic {
        match e.ty() {
            Ty::Int => out.push(edit("UOI", E::Neg(Box::new(e.clone())))),
            Ty::Bool => out.push(edit("UOI", E::Not(Box::new(e.clone())))),
            Ty::Arr => {}
        }
    }
    match e {
        E::Int(c) => {
            for v in crp_values(*c) {
                out.push(edit("CRP", lit(v)));
            }
        }
        E::Bool(_) | E::Var(..) => {}
        E::Arr(items) => {
            for (i, sub) in list_edits(items, line) {
                let mut xs = items.clone();
                xs[i] = sub.node.clone();
                out.push(sub.with(E::Arr(xs)));
            }
        }
        E::Index(n, i) => {
            for sub in expr_edits(i, line) {
                out.push(sub.with(E::Index(n.clone(), Box::new(sub.node.clone()))));
            }
        }
        E::Neg(x) => {
            for sub in expr_edits(x, line) {
                out.push(sub.with(E::Neg(Box::new(sub.node.clone()))));
            }
        }
        E::Not(x) => {
            for sub in expr_edits(x, line) {
                out.push(sub.with(E::Not(Box::new(sub.node.clone()))));
            }
        }
        E::Bin(op, l, r) => {
            let (name, alts): (&'static str, Vec<Op>) = if op.is_arith() {
                ("AOR", ARITH.to_vec())
            } else if op.is_rel() && l.ty() == Ty::Int {
                ("ROR", REL.to_vec())
            } else if op.is_logical() {
                ("LOR", vec![Op::And, Op::Or])
            } else {
                ("", Vec::new())
            };
            for alt in alts.into_iter().filter(|a| a != op) {
                out.push(edit(name, E::Bin(alt, l.clone(), r.clone())));
            }
            for sub in expr_edits(l, line) {
                out.push(sub.with(E::Bin(*op, Box::new(sub.node.clone()), r.clone())));
            }
            for sub in expr_edits(r, line) {
                out.push(sub.with(E::Bin(*op, l.clone(), Box::new(sub.node.clone()))));
            }
        }
        E::Call(n, args, t) => {
            for (i, sub) in list_edits(args, line) {
                let mut xs = args.clone();
                xs[i] = sub.node.clone();
                out.push(sub.with(E::Call(n.clone(), xs, *t)));
            }
        }
    }
    out
}

fn list_edits(items: &[E], line: u32) -> Vec<(usize, Edit<E>)> {
    items
        .iter()
        .enumerate()
        .flat_map(|(i, it)| expr_edits(it, line).into_iter().map(move |e| (i, e)))
        .collect()
}

/// Edits of one statement; `None` in the node means the statement is gone.
fn stmt_edits(s: &S) -> Vec<Edit<Option<S>>> {
    let mut out = Vec::new();
    let line = s.line;
    let with = |kind: SK| Some(S { line, kind });
    if !matches!(s.kind, SK::Ret(_)) {
        let dropped = match &s.kind {
            SK::Decl(n, ..) => Some(n.clone()),
            _ => None,
        };
        out.push(Edit {
            op: "SDL",
            line,
            dropped,
            node: None,
        });
    }
    match &s.kind {
        SK::Decl(n, t, e) => {
            for sub in expr_edits(e, line) {
                out.push(sub.with(with(SK::Decl(n.clone(), *t, sub.node.clone()))));
            }
        }
        SK::Assign(n, e) => {
            for sub in expr_edits(e, line) {
                out.push(sub.with(with(SK::Assign(n.clone(), sub.node.clone()))));
            }
        }
        SK::Ret(e) => {
            for sub in expr_edits(e, line) {
                out.push(sub.with(with(SK::Ret(sub.node.clone()))));
            }
        }
        SK::ArrSet(n, i, v) => {
            for sub in expr_edits(i, line) {
                out.push(sub.with(with(SK::ArrSet(n.clone(), sub.node.clone(), v.clone()))));
            }
            for sub in expr_edits(v, line) {
                out.push(sub.with(with(SK::ArrSet(n.clone(), i.clone(), sub.node.clone()))));
            }
        }
        SK::If(c, then, els) => {
            for sub in expr_edits(c, line) {
                out.push(sub.with(with(SK::If(sub.node.clone(), then.clone(), els.clone()))));
            }
            for sub in block_edits(then) {
                out.push(sub.with(with(SK::If(c.clone(), sub.node.clone(), els.clone()))));
            }
            if let Some(b) = els {
                for sub in block_edits(b) {
                    out.push(sub.with(with(SK::If(c.clone(), then.clone(), Some(sub.node.clone())))));
                }
            }
        }
        SK::While(c, body) => {
            for sub in expr_edits(c, line) {
                out.push(sub.with(with(SK::While(sub.node.clone(), body.clone()))));
            }
            for sub in block_edits(body) {
                out.push(sub.with(with(SK::While(c.clone(), sub.node.clone()))));
            }
        }
    }
    out
}

fn block_edits(b: &[S]) -> Vec<Edit<Vec<S>>> {
    let mut out = Vec::new();
    for (i, s) in b.iter().enumerate() {
        for sub in stmt_edits(s) {
            let mut xs = b.to_vec();
            match sub.node {
                Some(ref n) => xs[i] = n.clone(),
                None => {
                    xs.remove(i);
                }
            }
            out.push(Edit {
                op: sub.op,
                line: sub.line,
                dropped: sub.dropped,
                node: xs,
            });
        }
    }
    out
}

fn mentions(b: &[S], name: &str) -> bool {
    fn in_expr(e: &E, name: &str) -> bool {
        match e {
            E::Int(_) | E::Bool(_) => false,
            E::Var(n, _) => n == name,
            E::Index(n, i) => n == name || in_expr(i, name),
            E::Neg(x) | E::Not(x) => in_expr(x, name),
            E::Bin(_, l, r) => in_expr(l, name) || in_expr(r, name),
            E::Arr(xs) | E::Call(_, xs, _) => xs.iter().any(|x| in_expr(x, name)),
        }
    }
    b.iter().any(|s| match &s.kind {
        SK::Decl(n, _, e) | SK::Assign(n, e) => n == name || in_expr(e, name),
        SK::ArrSet(n, i, v) => n == name || in_expr(i, name) || in_expr(v, name),
        SK::Ret(e) => in_expr(e, name),
        SK::If(c, t, e) => in_expr(c, name) || mentions(t, name) || e.as_ref().is_some_and(|e| mentions(e, name)),
        SK::While(c, body) => in_expr(c, name) || mentions(body, name),
    })
}

/// Every distinct mutant of `p` for the given operator names.
pub fn scan(p: &Prog, ops: &[&str]) -> Vec<Mutant> {
    let mut seen = HashSet::new();
    seen.insert(gen::canonical(p));
    let mut out = Vec::new();
    for (fi, f) in p.funs.iter().enumerate() {
        for edit in block_edits(&f.body) {
            if !ops.contains(&edit.op) {
                continue;
            }
            if let Some(n) = &edit.dropped {
                if mentions(&edit.node, n) {
                    continue;
                }
            }
            let mut prog = p.clone();
            prog.funs[fi].body = edit.node;
            if seen.insert(gen::canonical(&prog)) {
                out.push(Mutant {
                    operator: edit.op,
                    prog,
                    line: edit.line,
                });
            }
        }
    }
    out
}

pub const ALL_OPS: [&str; 6] = ["AOR", "ROR", "LOR", "UOI", "CRP", "SDL"];
