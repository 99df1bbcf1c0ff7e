// SPDX-License-Identifier: Apache-2.0

//! Canonical formatting. Output depends only on tree structure, so two
//! structurally equal units print identically.

use std::fmt::Write;

use super::ast::*;

pub fn print_unit(unit: &SourceUnit) -> String {
    let mut out = String::new();
    for (i, f) in unit.functions.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        print_function(f, &mut out);
    }
    out
}

fn print_function(f: &FunctionDecl, out: &mut String) {
    let _ = write!(out, "fun {}(", f.name);
    for (i, p) in f.params.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        let _ = write!(out, "{}: {}", p.name, p.ty);
    }
    let _ = write!(out, ") -> {} ", f.return_type);
    print_block(&f.body, 0, out);
    out.push('\n');
}

fn indent(level: usize, out: &mut String) {
    for _ in 0..level {
        out.push_str("  ");
    }
}

fn print_block(b: &Block, level: usize, out: &mut String) {
    out.push_str("{\n");
    for s in &b.stmts {
        print_stmt(s, level + 1, out);
    }
    indent(level, out);
    out.push('}');
}

pub fn print_stmt(s: &Stmt, level: usize, out: &mut String) {
    indent(level, out);
    match &s.kind {
        StmtKind::VarDecl { name, ty, init } => {
            let _ = write!(out, "var {name}: {ty} = {};", expr_to_string(init));
        }
        StmtKind::Assign { name, value } => {
            let _ = write!(out, "{name} = {};", expr_to_string(value));
        }
        StmtKind::ArrayAssign { name, index, value } => {
            let _ = write!(
                out,
                "{name}[{}] = {};",
                expr_to_string(index),
                expr_to_string(value)
            );
        }
        StmtKind::If {
            cond,
            then_block,
            else_block,
        } => {
            let _ = write!(out, "if ({}) ", expr_to_string(cond));
            print_block(then_block, level, out);
            if let Some(b) = else_block {
                out.push_str(" else ");
                print_block(b, level, out);
            }
        }
        StmtKind::While { cond, body } => {
            let _ = write!(out, "while ({}) ", expr_to_string(cond));
            print_block(body, level, out);
        }
        StmtKind::Return(e) => {
            let _ = write!(out, "return {};", expr_to_string(e));
        }
    }
    out.push('\n');
}

pub fn expr_to_string(e: &Expr) -> String {
    let mut s = String::new();
    print_expr(e, &mut s);
    s
}

const UNARY_PREC: u8 = 7;

fn expr_prec(e: &Expr) -> u8 {
    match &e.kind {
        ExprKind::Binary { op, .. } => op.precedence(),
        ExprKind::Unary { .. } => UNARY_PREC,
        _ => UNARY_PREC + 1,
    }
}

fn print_child(e: &Expr, min_prec: u8, out: &mut String) {
    if expr_prec(e) < min_prec {
        out.push('(');
        print_expr(e, out);
        out.push(')');
    } else {
        print_expr(e, out);
    }
}

fn print_expr(e: &Expr, out: &mut String) {
    match &e.kind {
        ExprKind::Int(v) => {
            let _ = write!(out, "{v}");
        }
        ExprKind::Bool(b) => {
            let _ = write!(out, "{b}");
        }
        ExprKind::Var(n) => out.push_str(n),
        ExprKind::Array(items) => {
            out.push('[');
            for (i, it) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                print_expr(it, out);
            }
            out.push(']');
        }
        ExprKind::Index { base, index } => {
            print_child(base, UNARY_PREC + 1, out);
            out.push('[');
            print_expr(index, out);
            out.push(']');
        }
        ExprKind::Unary { op, operand } => {
            out.push_str(op.symbol());
            print_child(operand, UNARY_PREC, out);
        }
        ExprKind::Binary { op, lhs, rhs } => {
            let p = op.precedence();
            print_child(lhs, p, out);
            let _ = write!(out, " {} ", op.symbol());
            // Left-associative: an equal-precedence right child needs parens.
            print_child(rhs, p + 1, out);
        }
        ExprKind::Call { callee, args } => {
            out.push_str(callee);
            out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                print_expr(a, out);
            }
            out.push(')');
        }
    }
}
