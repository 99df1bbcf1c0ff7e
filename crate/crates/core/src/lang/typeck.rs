// SPDX-License-Identifier: Apache-2.0

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use super::ast::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TypeErrorKind {
    Mismatch,
    MissingReturn,
    UndeclaredVariable,
    UnknownFunction,
    ArityMismatch,
    DuplicateFunction,
    DuplicateParameter,
    DuplicateVariable,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TypeError {
    pub line: u32,
    pub kind: TypeErrorKind,
    pub message: String,
}

impl fmt::Display for TypeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

/// A unit that passed the typechecker, with the type of every expression.
#[derive(Debug)]
pub struct TypedUnit {
    unit: SourceUnit,
    expr_types: Vec<Type>,
    by_name: HashMap<String, usize>,
}

pub type SharedUnit = Arc<TypedUnit>;

impl TypedUnit {
    pub fn unit(&self) -> &SourceUnit {
        &self.unit
    }

    pub fn source(&self) -> &str {
        &self.unit.source
    }

    pub fn functions(&self) -> &[FunctionDecl] {
        &self.unit.functions
    }

    pub fn function(&self, name: &str) -> Option<&FunctionDecl> {
        self.by_name.get(name).map(|&i| &self.unit.functions[i])
    }

    pub fn type_of(&self, e: &Expr) -> Type {
        self.expr_types[e.id.0 as usize]
    }

    pub fn line_count(&self) -> u32 {
        self.unit.line_count
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.unit.name = name.into();
        self
    }
}

/// Checks operator typing, declarations, call arity and all-paths-return.
/// Reports every violation found, in source order.
pub fn typecheck(unit: SourceUnit) -> Result<TypedUnit, Vec<TypeError>> {
    let mut errors = Vec::new();
    let mut by_name = HashMap::new();
    for (i, f) in unit.functions.iter().enumerate() {
        if by_name.insert(f.name.clone(), i).is_some() {
            errors.push(TypeError {
                line: f.header_line(),
                kind: TypeErrorKind::DuplicateFunction,
                message: format!("function `{}` defined more than once", f.name),
            });
        }
    }
    let sigs: HashMap<&str, Signature> = unit
        .functions
        .iter()
        .map(|f| (f.name.as_str(), f.signature()))
        .collect();
    let mut types = vec![None; unit.expr_count as usize];
    for f in &unit.functions {
        let mut cx = Checker {
            sigs: &sigs,
            scopes: vec![HashMap::new()],
            types: &mut types,
            errors: &mut errors,
            return_type: f.return_type,
        };
        for p in &f.params {
            if cx.scopes[0].insert(p.name.clone(), p.ty).is_some() {
                cx.errors.push(TypeError {
                    line: p.span.line,
                    kind: TypeErrorKind::DuplicateParameter,
                    message: format!("parameter `{}` declared twice", p.name),
                });
            }
        }
        cx.block(&f.body);
        if !block_returns(&f.body) {
            errors.push(TypeError {
                line: f.header_line(),
                kind: TypeErrorKind::MissingReturn,
                message: format!("function `{}` may finish without returning", f.name),
            });
        }
    }
    if !errors.is_empty() {
        errors.sort_by_key(|e| e.line);
        return Err(errors);
    }
    let expr_types = types
        .into_iter()
        .map(|t| t.expect("every expression typed when no errors"))
        .collect();
    Ok(TypedUnit {
        unit,
        expr_types,
        by_name,
    })
}

pub fn block_returns(b: &Block) -> bool {
    b.stmts.iter().any(stmt_returns)
}

fn stmt_returns(s: &Stmt) -> bool {
    match &s.kind {
        StmtKind::Return(_) => true,
        StmtKind::If {
            then_block,
            else_block: Some(else_block),
            ..
        } => block_returns(then_block) && block_returns(else_block),
        _ => false,
    }
}

struct Checker<'a> {
    sigs: &'a HashMap<&'a str, Signature>,
    scopes: Vec<HashMap<String, Type>>,
    types: &'a mut Vec<Option<Type>>,
    errors: &'a mut Vec<TypeError>,
    return_type: Type,
}

impl Checker<'_> {
    fn lookup(&self, name: &str) -> Option<Type> {
        self.scopes.iter().rev().find_map(|s| s.get(name).copied())
    }

    fn err(&mut self, line: u32, kind: TypeErrorKind, message: String) {
        self.errors.push(TypeError {
            line,
            kind,
            message,
        });
    }

    fn expect(&mut self, e: &Expr, want: Type, what: &str) {
        if let Some(got) = self.expr(e) {
            if got != want {
                self.err(
                    e.anchor.line,
                    TypeErrorKind::Mismatch,
                    format!("{what}: expected {want}, found {got}"),
                );
            }
        }
    }

    fn block(&mut self, b: &Block) {
        self.scopes.push(HashMap::new());
        for s in &b.stmts {
            self.stmt(s);
        }
        self.scopes.pop();
    }

    fn variable(&mut self, name: &str, line: u32) -> Option<Type> {
        let t = self.lookup(name);
        if t.is_none() {
            self.err(
                line,
                TypeErrorKind::UndeclaredVariable,
                format!("use of undeclared variable `{name}`"),
            );
        }
        t
    }

    fn stmt(&mut self, s: &Stmt) {
        let line = s.line();
        match &s.kind {
            StmtKind::VarDecl { name, ty, init } => {
                self.expect(init, *ty, "initializer");
                if self.lookup(name).is_some() {
                    self.err(
                        line,
                        TypeErrorKind::DuplicateVariable,
                        format!("variable `{name}` is already declared"),
                    );
                } else {
                    self.scopes
                        .last_mut()
                        .expect("scope stack non-empty")
                        .insert(name.clone(), *ty);
                }
            }
            StmtKind::Assign { name, value } => {
                if let Some(t) = self.variable(name, line) {
                    self.expect(value, t, "assignment");
                } else {
                    self.expr(value);
                }
            }
            StmtKind::ArrayAssign { name, index, value } => {
                if let Some(t) = self.variable(name, line) {
                    if t != Type::IntArray {
                        self.err(
                            line,
                            TypeErrorKind::Mismatch,
                            format!("cannot index `{name}` of type {t}"),
                        );
                    }
                }
                self.expect(index, Type::Int, "array index");
                self.expect(value, Type::Int, "array element");
            }
            StmtKind::If {
                cond,
                then_block,
                else_block,
            } => {
                self.expect(cond, Type::Bool, "if condition");
                self.block(then_block);
                if let Some(b) = else_block {
                    self.block(b);
                }
            }
            StmtKind::While { cond, body } => {
                self.expect(cond, Type::Bool, "while condition");
                self.block(body);
            }
            StmtKind::Return(e) => {
                let rt = self.return_type;
                self.expect(e, rt, "return value");
            }
        }
    }

    fn expr(&mut self, e: &Expr) -> Option<Type> {
        let line = e.anchor.line;
        let t = match &e.kind {
            ExprKind::Int(_) => Some(Type::Int),
            ExprKind::Bool(_) => Some(Type::Bool),
            ExprKind::Var(name) => self.variable(name, line),
            ExprKind::Array(items) => {
                for it in items {
                    self.expect(it, Type::Int, "array element");
                }
                Some(Type::IntArray)
            }
            ExprKind::Index { base, index } => {
                self.expect(base, Type::IntArray, "indexed value");
                self.expect(index, Type::Int, "array index");
                Some(Type::Int)
            }
            ExprKind::Unary { op, operand } => {
                let want = match op {
                    UnaryOp::Neg => Type::Int,
                    UnaryOp::Not => Type::Bool,
                };
                self.expect(operand, want, "operand");
                Some(want)
            }
            ExprKind::Binary { op, lhs, rhs } => self.binary(*op, lhs, rhs, line),
            ExprKind::Call { callee, args } => {
                let Some(sig) = self.sigs.get(callee.as_str()).cloned() else {
                    for a in args {
                        self.expr(a);
                    }
                    self.err(
                        line,
                        TypeErrorKind::UnknownFunction,
                        format!("call to unknown function `{callee}`"),
                    );
                    return None;
                };
                if sig.params.len() != args.len() {
                    self.err(
                        line,
                        TypeErrorKind::ArityMismatch,
                        format!(
                            "`{callee}` takes {} argument(s), {} given",
                            sig.params.len(),
                            args.len()
                        ),
                    );
                    for a in args {
                        self.expr(a);
                    }
                } else {
                    for (a, want) in args.iter().zip(&sig.params) {
                        self.expect(a, *want, "argument");
                    }
                }
                Some(sig.return_type)
            }
        };
        if let Some(t) = t {
            self.types[e.id.0 as usize] = Some(t);
        }
        t
    }

    fn binary(&mut self, op: BinaryOp, lhs: &Expr, rhs: &Expr, line: u32) -> Option<Type> {
        if op.is_arithmetic() {
            self.expect(lhs, Type::Int, "left operand");
            self.expect(rhs, Type::Int, "right operand");
            return Some(Type::Int);
        }
        if op.is_logical() {
            self.expect(lhs, Type::Bool, "left operand");
            self.expect(rhs, Type::Bool, "right operand");
            return Some(Type::Bool);
        }
        if matches!(op, BinaryOp::Eq | BinaryOp::Ne) {
            let l = self.expr(lhs);
            let r = self.expr(rhs);
            if let (Some(l), Some(r)) = (l, r) {
                if l != r || l == Type::IntArray {
                    self.err(
                        line,
                        TypeErrorKind::Mismatch,
                        format!("cannot compare {l} {} {r}", op.symbol()),
                    );
                }
            }
            return Some(Type::Bool);
        }
        self.expect(lhs, Type::Int, "left operand");
        self.expect(rhs, Type::Int, "right operand");
        Some(Type::Bool)
    }
}
