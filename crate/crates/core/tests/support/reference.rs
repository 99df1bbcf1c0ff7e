// SPDX-License-Identifier: Apache-2.0

//! A second, deliberately naive MiniLang evaluator over the generator tree.
//!
//! Cost rules it encodes: a statement is covered and then charged one step;
//! a `while` is covered and charged again before every re-check; a binary
//! operation is charged before its operands run. `&&`/`||` short-circuit,
//! integer arithmetic wraps, `/` and `%` trap on a zero divisor after both
//! operands are evaluated. Generated programs put each statement on its own
//! line, so coverage is header lines plus executed statement lines.

use std::collections::{BTreeSet, HashMap};

use arena_core::lang::{Outcome, TrapKind, Value};

use super::gen::{Op, Prog, E, F, S, SK};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RV {
    I(i64),
    B(bool),
    A(Vec<i64>),
}

impl RV {
    pub fn to_value(&self) -> Value {
        match self {
            RV::I(v) => Value::Int(*v),
            RV::B(b) => Value::Bool(*b),
            RV::A(xs) => Value::IntArray(xs.clone()),
        }
    }

    pub fn from_value(v: &Value) -> RV {
        match v {
            Value::Int(x) => RV::I(*x),
            Value::Bool(b) => RV::B(*b),
            Value::IntArray(xs) => RV::A(xs.clone()),
        }
    }

    fn int(self) -> i64 {
        match self {
            RV::I(v) => v,
            other => panic!("expected int, got {other:?}"),
        }
    }

    fn bool(self) -> bool {
        match self {
            RV::B(b) => b,
            other => panic!("expected bool, got {other:?}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RefRun {
    pub outcome: Result<RV, TrapKind>,
    pub covered: BTreeSet<u32>,
    pub steps: u64,
}

impl RefRun {
    pub fn outcome_value(&self) -> Outcome {
        match &self.outcome {
            Ok(v) => Outcome::Value(v.to_value()),
            Err(t) => Outcome::Trap(*t),
        }
    }
}

pub fn run(p: &Prog, function: &str, args: &[RV], budget: u64) -> RefRun {
    let mut m = M {
        p,
        budget,
        steps: 0,
        covered: BTreeSet::new(),
    };
    let outcome = m.call(p.fun(function), args.to_vec());
    RefRun {
        outcome,
        covered: m.covered,
        steps: m.steps,
    }
}

struct M<'p> {
    p: &'p Prog,
    budget: u64,
    steps: u64,
    covered: BTreeSet<u32>,
}

enum Next {
    Go,
    Ret(RV),
}

type R<T> = Result<T, TrapKind>;

impl M<'_> {
    fn tick(&mut self) -> R<()> {
        if self.steps == self.budget {
            return Err(TrapKind::StepBudgetExceeded);
        }
        self.steps += 1;
        Ok(())
    }

    fn call(&mut self, f: &F, args: Vec<RV>) -> R<RV> {
        self.covered.insert(f.line);
        let mut env: HashMap<String, RV> = f.params.iter().map(|(n, _)| n.clone()).zip(args).collect();
        match self.block(&f.body, &mut env)? {
            Next::Ret(v) => Ok(v),
            Next::Go => panic!("generated function {} fell off its end", f.name),
        }
    }

    fn block(&mut self, b: &[S], env: &mut HashMap<String, RV>) -> R<Next> {
        for s in b {
            if let Next::Ret(v) = self.stmt(s, env)? {
                return Ok(Next::Ret(v));
            }
        }
        Ok(Next::Go)
    }

    fn stmt(&mut self, s: &S, env: &mut HashMap<String, RV>) -> R<Next> {
        self.covered.insert(s.line);
        self.tick()?;
        match &s.kind {
            SK::Decl(n, _, e) | SK::Assign(n, e) => {
                let v = self.eval(e, env)?;
                env.insert(n.clone(), v);
            }
            SK::ArrSet(n, i, v) => {
                let i = self.eval(i, env)?.int();
                let v = self.eval(v, env)?.int();
                let Some(RV::A(xs)) = env.get_mut(n) else {
                    panic!("{n} is not an array")
                };
                if i < 0 || i as u64 >= xs.len() as u64 {
                    return Err(TrapKind::IndexOutOfBounds);
                }
                xs[i as usize] = v;
            }
            SK::If(c, then, els) => {
                if self.eval(c, env)?.bool() {
                    return self.block(then, env);
                }
                if let Some(b) = els {
                    return self.block(b, env);
                }
            }
            SK::While(c, body) => {
                while self.eval(c, env)?.bool() {
                    if let Next::Ret(v) = self.block(body, env)? {
                        return Ok(Next::Ret(v));
                    }
                    self.covered.insert(s.line);
                    self.tick()?;
                }
            }
            SK::Ret(e) => return Ok(Next::Ret(self.eval(e, env)?)),
        }
        Ok(Next::Go)
    }

    fn eval(&mut self, e: &E, env: &mut HashMap<String, RV>) -> R<RV> {
        Ok(match e {
            E::Int(v) => RV::I(*v),
            E::Bool(b) => RV::B(*b),
            E::Var(n, _) => env[n].clone(),
            E::Arr(items) => {
                let mut xs = Vec::new();
                for it in items {
                    xs.push(self.eval(it, env)?.int());
                }
                RV::A(xs)
            }
            E::Index(n, i) => {
                let i = self.eval(i, env)?.int();
                let RV::A(xs) = &env[n] else { panic!("{n} is not an array") };
                if i < 0 || i as u64 >= xs.len() as u64 {
                    return Err(TrapKind::IndexOutOfBounds);
                }
                RV::I(xs[i as usize])
            }
            E::Neg(x) => RV::I(0i64.wrapping_sub(self.eval(x, env)?.int())),
            E::Not(x) => RV::B(!self.eval(x, env)?.bool()),
            E::Bin(op, l, r) => {
                self.tick()?;
                match op {
                    Op::And => RV::B(self.eval(l, env)?.bool() && self.eval(r, env)?.bool()),
                    Op::Or => RV::B(self.eval(l, env)?.bool() || self.eval(r, env)?.bool()),
                    Op::Eq => RV::B(self.eval(l, env)? == self.eval(r, env)?),
                    Op::Ne => RV::B(self.eval(l, env)? != self.eval(r, env)?),
                    _ => {
                        let a = self.eval(l, env)?.int();
                        let b = self.eval(r, env)?.int();
                        arith(*op, a, b)?
                    }
                }
            }
            E::Call(name, args, _) => {
                let mut vals = Vec::new();
                for a in args {
                    vals.push(self.eval(a, env)?);
                }
                let p = self.p;
                self.call(p.fun(name), vals)?
            }
        })
    }
}

/// Integer semantics via i128 and an explicit wrap back to 64 bits.
fn arith(op: Op, a: i64, b: i64) -> R<RV> {
    let wrap = |x: i128| RV::I(x as i64);
    let (a, b) = (a as i128, b as i128);
    Ok(match op {
        Op::Add => wrap(a + b),
        Op::Sub => wrap(a - b),
        Op::Mul => wrap(a * b),
        Op::Div if b == 0 => return Err(TrapKind::DivByZero),
        Op::Rem if b == 0 => return Err(TrapKind::ModByZero),
        Op::Div => wrap(a / b),
        Op::Rem => wrap(a % b),
        Op::Lt => RV::B(a < b),
        Op::Le => RV::B(a <= b),
        Op::Gt => RV::B(a > b),
        Op::Ge => RV::B(a >= b),
        _ => unreachable!("logical and equality handled by the caller"),
    })
}
