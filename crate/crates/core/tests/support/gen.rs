// SPDX-License-Identifier: Apache-2.0

//! Random well-typed MiniLang programs, kept as a test-side tree so that the
//! reference evaluator and the site scanner never look at production ASTs.
//! Rendering is fully parenthesized, one statement per line.

use std::fmt::Write;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ty {
    Int,
    Bool,
    Arr,
}

impl Ty {
    fn name(self) -> &'static str {
        match self {
            Ty::Int => "int",
            Ty::Bool => "bool",
            Ty::Arr => "int[]",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Op {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    And,
    Or,
}

pub const ARITH: [Op; 5] = [Op::Add, Op::Sub, Op::Mul, Op::Div, Op::Rem];
pub const REL: [Op; 6] = [Op::Lt, Op::Le, Op::Gt, Op::Ge, Op::Eq, Op::Ne];

impl Op {
    pub fn sym(self) -> &'static str {
        match self {
            Op::Add => "+",
            Op::Sub => "-",
            Op::Mul => "*",
            Op::Div => "/",
            Op::Rem => "%",
            Op::Lt => "<",
            Op::Le => "<=",
            Op::Gt => ">",
            Op::Ge => ">=",
            Op::Eq => "==",
            Op::Ne => "!=",
            Op::And => "&&",
            Op::Or => "||",
        }
    }

    pub fn is_arith(self) -> bool {
        ARITH.contains(&self)
    }

    pub fn is_rel(self) -> bool {
        REL.contains(&self)
    }

    pub fn is_logical(self) -> bool {
        matches!(self, Op::And | Op::Or)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum E {
    Int(i64),
    Bool(bool),
    Var(String, Ty),
    Arr(Vec<E>),
    /// Array variable indexed by an int expression.
    Index(String, Box<E>),
    Neg(Box<E>),
    Not(Box<E>),
    Bin(Op, Box<E>, Box<E>),
    Call(String, Vec<E>, Ty),
}

impl E {
    pub fn ty(&self) -> Ty {
        match self {
            E::Int(_) | E::Index(..) | E::Neg(_) => Ty::Int,
            E::Bool(_) | E::Not(_) => Ty::Bool,
            E::Var(_, t) | E::Call(_, _, t) => *t,
            E::Arr(_) => Ty::Arr,
            E::Bin(op, ..) => {
                if op.is_arith() {
                    Ty::Int
                } else {
                    Ty::Bool
                }
            }
        }
    }

    fn bin(op: Op, l: E, r: E) -> E {
        E::Bin(op, Box::new(l), Box::new(r))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SK {
    Decl(String, Ty, E),
    Assign(String, E),
    ArrSet(String, E, E),
    If(E, Vec<S>, Option<Vec<S>>),
    While(E, Vec<S>),
    Ret(E),
}

/// A statement; `line` is filled in by [`render`].
#[derive(Debug, Clone, PartialEq)]
pub struct S {
    pub line: u32,
    pub kind: SK,
}

impl S {
    fn new(kind: SK) -> S {
        S { line: 0, kind }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct F {
    pub name: String,
    pub params: Vec<(String, Ty)>,
    pub ret: Ty,
    pub body: Vec<S>,
    pub line: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prog {
    pub funs: Vec<F>,
}

impl Prog {
    pub fn fun(&self, name: &str) -> &F {
        self.funs.iter().find(|f| f.name == name).expect("known function")
    }
}

pub fn expr_text(e: &E) -> String {
    match e {
        E::Int(v) => v.to_string(),
        E::Bool(b) => b.to_string(),
        E::Var(n, _) => n.clone(),
        E::Arr(items) => format!("[{}]", items.iter().map(expr_text).collect::<Vec<_>>().join(", ")),
        E::Index(n, i) => format!("{n}[{}]", expr_text(i)),
        E::Neg(x) => format!("-({})", expr_text(x)),
        E::Not(x) => format!("!({})", expr_text(x)),
        E::Bin(op, l, r) => format!("({} {} {})", expr_text(l), op.sym(), expr_text(r)),
        E::Call(n, args, _) => format!("{n}({})", args.iter().map(expr_text).collect::<Vec<_>>().join(", ")),
    }
}

/// Renders `p` and records every statement's and header's line.
pub fn render(p: &mut Prog) -> String {
    let mut out = String::new();
    let mut line = 1u32;
    for (i, f) in p.funs.iter_mut().enumerate() {
        if i > 0 {
            out.push('\n');
            line += 1;
        }
        f.line = line;
        let params: Vec<String> = f.params.iter().map(|(n, t)| format!("{n}: {}", t.name())).collect();
        let _ = writeln!(out, "fun {}({}) -> {} {{", f.name, params.join(", "), f.ret.name());
        line += 1;
        render_block(&mut f.body, 1, &mut line, &mut out);
        out.push_str("}\n");
        line += 1;
    }
    out
}

fn render_block(stmts: &mut [S], depth: usize, line: &mut u32, out: &mut String) {
    for s in stmts {
        let pad = "  ".repeat(depth);
        s.line = *line;
        match &mut s.kind {
            SK::Decl(n, t, e) => {
                let _ = writeln!(out, "{pad}var {n}: {} = {};", t.name(), expr_text(e));
                *line += 1;
            }
            SK::Assign(n, e) => {
                let _ = writeln!(out, "{pad}{n} = {};", expr_text(e));
                *line += 1;
            }
            SK::ArrSet(n, i, v) => {
                let _ = writeln!(out, "{pad}{n}[{}] = {};", expr_text(i), expr_text(v));
                *line += 1;
            }
            SK::Ret(e) => {
                let _ = writeln!(out, "{pad}return {};", expr_text(e));
                *line += 1;
            }
            SK::If(c, then, els) => {
                let _ = writeln!(out, "{pad}if ({}) {{", expr_text(c));
                *line += 1;
                render_block(then, depth + 1, line, out);
                if let Some(b) = els {
                    let _ = writeln!(out, "{pad}}} else {{");
                    *line += 1;
                    render_block(b, depth + 1, line, out);
                }
                let _ = writeln!(out, "{pad}}}");
                *line += 1;
            }
            SK::While(c, body) => {
                let _ = writeln!(out, "{pad}while ({}) {{", expr_text(c));
                *line += 1;
                render_block(body, depth + 1, line, out);
                let _ = writeln!(out, "{pad}}}");
                *line += 1;
            }
        }
    }
}

/// Position-free text, for comparing trees.
pub fn canonical(p: &Prog) -> String {
    let mut q = p.clone();
    render(&mut q)
}

struct Gen<'r> {
    rng: &'r mut ChaCha8Rng,
    /// Signatures of functions defined so far (callable).
    sigs: Vec<(String, Vec<Ty>, Ty)>,
    fresh: u32,
}

#[derive(Clone)]
struct Scope {
    vars: Vec<(String, Ty)>,
}

impl Scope {
    fn of(&self, t: Ty) -> Vec<&str> {
        self.vars.iter().filter(|(_, vt)| *vt == t).map(|(n, _)| n.as_str()).collect()
    }
}

fn pick_ty(rng: &mut ChaCha8Rng) -> Ty {
    match rng.random_range(0..10) {
        0..=5 => Ty::Int,
        6..=8 => Ty::Bool,
        _ => Ty::Arr,
    }
}

impl Gen<'_> {
    fn literal(&mut self) -> i64 {
        match self.rng.random_range(0..20) {
            0 => i64::MAX,
            1 => 4_611_686_018_427_387_904,
            _ => self.rng.random_range(0..=12),
        }
    }

    fn expr(&mut self, t: Ty, depth: u32, sc: &Scope) -> E {
        let leaf = depth == 0 || self.rng.random_range(0..10) < 3;
        match t {
            Ty::Int => {
                let vars = sc.of(Ty::Int);
                if leaf {
                    if !vars.is_empty() && self.rng.random_bool(0.6) {
                        return E::Var(vars[self.rng.random_range(0..vars.len())].to_string(), Ty::Int);
                    }
                    return E::Int(self.literal());
                }
                let arrs = sc.of(Ty::Arr);
                match self.rng.random_range(0..10) {
                    0 => E::Neg(Box::new(self.expr(Ty::Int, depth - 1, sc))),
                    1 if !arrs.is_empty() => {
                        let a = arrs[self.rng.random_range(0..arrs.len())].to_string();
                        E::Index(a, Box::new(self.expr(Ty::Int, depth - 1, sc)))
                    }
                    2 => self.call(Ty::Int, depth, sc).unwrap_or(E::Int(self.literal())),
                    _ => {
                        let op = ARITH[self.rng.random_range(0..ARITH.len())];
                        E::bin(op, self.expr(Ty::Int, depth - 1, sc), self.expr(Ty::Int, depth - 1, sc))
                    }
                }
            }
            Ty::Bool => {
                let vars = sc.of(Ty::Bool);
                if leaf {
                    if !vars.is_empty() && self.rng.random_bool(0.5) {
                        return E::Var(vars[self.rng.random_range(0..vars.len())].to_string(), Ty::Bool);
                    }
                    if self.rng.random_bool(0.3) {
                        return E::Bool(self.rng.random_bool(0.5));
                    }
                    let op = REL[self.rng.random_range(0..REL.len())];
                    return E::bin(op, self.expr(Ty::Int, 0, sc), self.expr(Ty::Int, 0, sc));
                }
                match self.rng.random_range(0..10) {
                    0 => E::Not(Box::new(self.expr(Ty::Bool, depth - 1, sc))),
                    1 | 2 => {
                        let op = if self.rng.random_bool(0.5) { Op::And } else { Op::Or };
                        E::bin(op, self.expr(Ty::Bool, depth - 1, sc), self.expr(Ty::Bool, depth - 1, sc))
                    }
                    3 => {
                        let op = if self.rng.random_bool(0.5) { Op::Eq } else { Op::Ne };
                        E::bin(op, self.expr(Ty::Bool, depth - 1, sc), self.expr(Ty::Bool, depth - 1, sc))
                    }
                    4 => self.call(Ty::Bool, depth, sc).unwrap_or(E::Bool(true)),
                    _ => {
                        let op = REL[self.rng.random_range(0..REL.len())];
                        E::bin(op, self.expr(Ty::Int, depth - 1, sc), self.expr(Ty::Int, depth - 1, sc))
                    }
                }
            }
            Ty::Arr => {
                let vars = sc.of(Ty::Arr);
                if !vars.is_empty() && self.rng.random_bool(0.5) {
                    return E::Var(vars[self.rng.random_range(0..vars.len())].to_string(), Ty::Arr);
                }
                if depth > 0 && self.rng.random_bool(0.2) {
                    if let Some(c) = self.call(Ty::Arr, depth, sc) {
                        return c;
                    }
                }
                let n = self.rng.random_range(0..=3);
                E::Arr((0..n).map(|_| self.expr(Ty::Int, depth.saturating_sub(1), sc)).collect())
            }
        }
    }

    fn call(&mut self, ret: Ty, depth: u32, sc: &Scope) -> Option<E> {
        let options: Vec<usize> = (0..self.sigs.len()).filter(|&i| self.sigs[i].2 == ret).collect();
        if options.is_empty() || depth == 0 {
            return None;
        }
        let (name, params, _) = self.sigs[options[self.rng.random_range(0..options.len())]].clone();
        let args = params.iter().map(|&t| self.expr(t, depth - 1, sc)).collect();
        Some(E::Call(name, args, ret))
    }

    fn name(&mut self, prefix: &str) -> String {
        self.fresh += 1;
        format!("{prefix}{}", self.fresh)
    }

    fn block(&mut self, depth: u32, sc: &mut Scope, ret: Ty, len: u32) -> Vec<S> {
        let mut out = Vec::new();
        for _ in 0..len {
            let k = self.rng.random_range(0..12);
            let s = match k {
                0..=3 => {
                    let t = pick_ty(self.rng);
                    let n = self.name("v");
                    let e = self.expr(t, 2, sc);
                    sc.vars.push((n.clone(), t));
                    SK::Decl(n, t, e)
                }
                4..=5 => {
                    let t = pick_ty(self.rng);
                    let vars = sc.of(t);
                    if vars.is_empty() {
                        continue;
                    }
                    let n = vars[self.rng.random_range(0..vars.len())].to_string();
                    SK::Assign(n, self.expr(t, 2, sc))
                }
                6 => {
                    let arrs = sc.of(Ty::Arr);
                    if arrs.is_empty() {
                        continue;
                    }
                    let n = arrs[self.rng.random_range(0..arrs.len())].to_string();
                    let i = if self.rng.random_bool(0.7) {
                        E::Int(self.rng.random_range(0..3))
                    } else {
                        self.expr(Ty::Int, 1, sc)
                    };
                    SK::ArrSet(n, i, self.expr(Ty::Int, 1, sc))
                }
                7..=9 if depth > 0 => {
                    let c = self.expr(Ty::Bool, 2, sc);
                    let mut inner = sc.clone();
                    let n = self.rng.random_range(0..3);
                    let mut then = self.block(depth - 1, &mut inner, ret, n);
                    if self.rng.random_bool(0.3) {
                        then.push(S::new(SK::Ret(self.expr(ret, 2, &inner))));
                    }
                    let els = if self.rng.random_bool(0.5) {
                        let mut inner = sc.clone();
                        let n = self.rng.random_range(0..3);
                        Some(self.block(depth - 1, &mut inner, ret, n))
                    } else {
                        None
                    };
                    SK::If(c, then, els)
                }
                10 if depth > 0 => {
                    // A counted loop, usually; sometimes an arbitrary condition.
                    let counter = self.name("i");
                    let bound = self.rng.random_range(0..5);
                    out.push(S::new(SK::Decl(counter.clone(), Ty::Int, E::Int(0))));
                    sc.vars.push((counter.clone(), Ty::Int));
                    let mut cond = E::bin(Op::Lt, E::Var(counter.clone(), Ty::Int), E::Int(bound));
                    if self.rng.random_bool(0.2) {
                        cond = E::bin(Op::Or, cond, self.expr(Ty::Bool, 1, sc));
                    }
                    let mut inner = sc.clone();
                    let n = self.rng.random_range(0..3);
                    let mut body = self.block(depth - 1, &mut inner, ret, n);
                    body.push(S::new(SK::Assign(
                        counter.clone(),
                        E::bin(Op::Add, E::Var(counter, Ty::Int), E::Int(1)),
                    )));
                    SK::While(cond, body)
                }
                _ => continue,
            };
            out.push(S::new(s));
        }
        out
    }
}

/// A random program with 1 to 3 functions; later functions may call
/// earlier ones. The last function is the usual entry point.
pub fn program(rng: &mut ChaCha8Rng) -> Prog {
    let mut g = Gen {
        rng,
        sigs: Vec::new(),
        fresh: 0,
    };
    let n = g.rng.random_range(1..=3);
    let mut funs = Vec::new();
    for fi in 0..n {
        let name = format!("f{fi}");
        let np = g.rng.random_range(0..=3);
        let params: Vec<(String, Ty)> = (0..np).map(|i| (format!("p{i}"), pick_ty(g.rng))).collect();
        let ret = pick_ty(g.rng);
        let mut sc = Scope { vars: params.clone() };
        let len = g.rng.random_range(0..5);
        let mut body = g.block(2, &mut sc, ret, len);
        body.push(S::new(SK::Ret(g.expr(ret, 3, &sc))));
        g.sigs.push((name.clone(), params.iter().map(|p| p.1).collect(), ret));
        funs.push(F {
            name,
            params,
            ret,
            body,
            line: 0,
        });
    }
    let mut p = Prog { funs };
    render(&mut p);
    p
}

/// Arguments for `f`: small ints with occasional extremes, short arrays.
pub fn args(rng: &mut ChaCha8Rng, f: &F) -> Vec<super::reference::RV> {
    use super::reference::RV;
    f.params
        .iter()
        .map(|(_, t)| match t {
            Ty::Int => RV::I(match rng.random_range(0..20) {
                0 => i64::MIN,
                1 => i64::MAX,
                _ => rng.random_range(-10..=10),
            }),
            Ty::Bool => RV::B(rng.random_bool(0.5)),
            Ty::Arr => {
                let n = rng.random_range(0..=4);
                RV::A((0..n).map(|_| rng.random_range(-5..=5)).collect())
            }
        })
        .collect()
}

/// The abs_diff fixture as a test-side tree.
pub fn abs_diff() -> Prog {
    let a = || E::Var("a".into(), Ty::Int);
    let b = || E::Var("b".into(), Ty::Int);
    let mut p = Prog {
        funs: vec![F {
            name: "abs_diff".into(),
            params: vec![("a".into(), Ty::Int), ("b".into(), Ty::Int)],
            ret: Ty::Int,
            body: vec![
                S::new(SK::If(
                    E::bin(Op::Gt, a(), b()),
                    vec![S::new(SK::Ret(E::bin(Op::Sub, a(), b())))],
                    None,
                )),
                S::new(SK::Ret(E::bin(Op::Sub, b(), a()))),
            ],
            line: 0,
        }],
    };
    render(&mut p);
    p
}
