// SPDX-License-Identifier: Apache-2.0

//! Defender tests: admission against the original unit, differential kill
//! checks, the kill matrix, and a brute-force equivalence oracle.

mod equivalence;

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use equivalence::{
    bounded_equivalence_oracle, Domain, EquivalenceError, EquivalenceVerdict, ParamDomain,
    MAX_DOMAIN_SIZE,
};

use crate::lang::{evaluate_call, CallError, Outcome, TrapKind, TypedUnit, Value};

pub const MAX_ASSERTIONS: usize = 10;

/// `function(args) == expected`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Assertion {
    #[serde(rename = "fn")]
    pub function: String,
    pub args: Vec<Value>,
    pub expected: Value,
}

impl Assertion {
    pub fn new(function: impl Into<String>, args: Vec<Value>, expected: Value) -> Self {
        Assertion {
            function: function.into(),
            args,
            expected,
        }
    }
}

impl std::fmt::Display for Assertion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}(", self.function)?;
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ") == {}", self.expected)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TestRejection {
    #[error("test has no assertions")]
    EmptyTest,
    #[error("test has {count} assertions, limit is {limit}")]
    TooManyAssertions { count: usize, limit: usize },
    #[error("assertion {index}: {error}")]
    InvalidAssertion { index: usize, error: CallError },
    #[error("assertion {index} fails on the original: got {actual}")]
    AssertionFailsOnOriginal { index: usize, actual: Outcome },
    #[error("assertion {index} traps on the original: {kind}")]
    TrapOnOriginal { index: usize, kind: TrapKind },
}

impl TestRejection {
    pub fn code(&self) -> &'static str {
        match self {
            TestRejection::EmptyTest => "EMPTY_TEST",
            TestRejection::TooManyAssertions { .. } => "TOO_MANY_ASSERTIONS",
            TestRejection::InvalidAssertion { .. } => "INVALID_ASSERTION",
            TestRejection::AssertionFailsOnOriginal { .. } => "ASSERTION_FAILS_ON_ORIGINAL",
            TestRejection::TrapOnOriginal { .. } => "TRAP_ON_ORIGINAL",
        }
    }
}

/// A test admitted against the original unit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidTest {
    pub assertions: Vec<Assertion>,
    pub covered_lines: BTreeSet<u32>,
}

/// Admits `assertions` if every one evaluates to its expected value on
/// `original` within `budget`.
pub fn validate_test(
    original: &TypedUnit,
    assertions: &[Assertion],
    budget: u64,
) -> Result<ValidTest, TestRejection> {
    if assertions.is_empty() {
        return Err(TestRejection::EmptyTest);
    }
    if assertions.len() > MAX_ASSERTIONS {
        return Err(TestRejection::TooManyAssertions {
            count: assertions.len(),
            limit: MAX_ASSERTIONS,
        });
    }
    let mut covered_lines = BTreeSet::new();
    for (index, a) in assertions.iter().enumerate() {
        let ret = original
            .function(&a.function)
            .map(|f| f.return_type)
            .ok_or_else(|| TestRejection::InvalidAssertion {
                index,
                error: CallError::UnknownFunction(a.function.clone()),
            })?;
        if a.expected.ty() != ret {
            return Err(TestRejection::InvalidAssertion {
                index,
                error: CallError::ArityOrTypeMismatch {
                    function: a.function.clone(),
                    expected: format!("{ret} result"),
                    got: format!("{} expected value", a.expected.ty()),
                },
            });
        }
        let (outcome, trace) = evaluate_call(original, &a.function, &a.args, budget)
            .map_err(|error| TestRejection::InvalidAssertion { index, error })?;
        match outcome {
            Outcome::Value(ref v) if *v == a.expected => {}
            Outcome::Value(_) => {
                return Err(TestRejection::AssertionFailsOnOriginal {
                    index,
                    actual: outcome,
                })
            }
            Outcome::Trap(kind) => return Err(TestRejection::TrapOnOriginal { index, kind }),
        }
        covered_lines.extend(trace.covered_lines);
    }
    Ok(ValidTest {
        assertions: assertions.to_vec(),
        covered_lines,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum KillResult {
    /// Index of the first assertion whose outcome differs.
    Killed(usize),
    Survived,
}

impl KillResult {
    pub fn is_killed(self) -> bool {
        matches!(self, KillResult::Killed(_))
    }
}

/// Runs `test` against `mutant`, comparing with the original's outcomes.
/// A call the mutant cannot serve counts as a difference.
pub fn kill_check(original: &TypedUnit, mutant: &TypedUnit, test: &ValidTest, budget: u64) -> KillResult {
    for (i, a) in test.assertions.iter().enumerate() {
        let base = evaluate_call(original, &a.function, &a.args, budget).map(|r| r.0);
        let other = evaluate_call(mutant, &a.function, &a.args, budget).map(|r| r.0);
        if base != other {
            return KillResult::Killed(i);
        }
    }
    KillResult::Survived
}

/// Same as [`kill_check`] but trusts the test's expected values as the
/// original's outcomes, so the original is not re-run.
pub fn kill_check_against_expected(mutant: &TypedUnit, test: &ValidTest, budget: u64) -> KillResult {
    for (i, a) in test.assertions.iter().enumerate() {
        match evaluate_call(mutant, &a.function, &a.args, budget) {
            Ok((Outcome::Value(v), _)) if v == a.expected => {}
            _ => return KillResult::Killed(i),
        }
    }
    KillResult::Survived
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MatrixEntry {
    Killed(usize),
    Survived,
    NotRun,
}

impl From<KillResult> for MatrixEntry {
    fn from(r: KillResult) -> Self {
        match r {
            KillResult::Killed(i) => MatrixEntry::Killed(i),
            KillResult::Survived => MatrixEntry::Survived,
        }
    }
}

/// Test-by-mutant results, addressed by position in the input slices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KillMatrix {
    tests: usize,
    mutants: usize,
    entries: Vec<MatrixEntry>,
}

impl KillMatrix {
    pub fn new(tests: usize, mutants: usize) -> Self {
        KillMatrix {
            tests,
            mutants,
            entries: vec![MatrixEntry::NotRun; tests * mutants],
        }
    }

    pub fn get(&self, test: usize, mutant: usize) -> MatrixEntry {
        self.entries[test * self.mutants + mutant]
    }

    pub fn set(&mut self, test: usize, mutant: usize, entry: MatrixEntry) {
        self.entries[test * self.mutants + mutant] = entry;
    }

    pub fn test_count(&self) -> usize {
        self.tests
    }

    pub fn mutant_count(&self) -> usize {
        self.mutants
    }

    pub fn is_killed(&self, mutant: usize) -> bool {
        (0..self.tests).any(|t| matches!(self.get(t, mutant), MatrixEntry::Killed(_)))
    }

    /// Killed mutants over all mutants; 1.0 when there are none.
    pub fn mutation_score(&self) -> f64 {
        if self.mutants == 0 {
            return 1.0;
        }
        let killed = (0..self.mutants).filter(|&m| self.is_killed(m)).count();
        killed as f64 / self.mutants as f64
    }
}

/// Executes every (test, mutant) pair in parallel.
pub fn build_kill_matrix(
    original: &TypedUnit,
    mutants: &[&TypedUnit],
    tests: &[ValidTest],
    budget: u64,
) -> (KillMatrix, f64) {
    let mut matrix = KillMatrix::new(tests.len(), mutants.len());
    let results: Vec<KillResult> = (0..tests.len() * mutants.len())
        .into_par_iter()
        .map(|i| {
            let (t, m) = (i / mutants.len(), i % mutants.len());
            kill_check(original, mutants[m], &tests[t], budget)
        })
        .collect();
    for (i, r) in results.into_iter().enumerate() {
        matrix.set(i / mutants.len(), i % mutants.len(), r.into());
    }
    let score = matrix.mutation_score();
    (matrix, score)
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CoverageReport {
    pub per_test: Vec<BTreeSet<u32>>,
    pub suite_covered_lines: BTreeSet<u32>,
}

impl CoverageReport {
    pub fn from_tests<'a>(tests: impl IntoIterator<Item = &'a ValidTest>) -> Self {
        let mut report = CoverageReport::default();
        for t in tests {
            report.add(t.covered_lines.clone());
        }
        report
    }

    pub fn add(&mut self, lines: BTreeSet<u32>) {
        self.suite_covered_lines.extend(lines.iter().copied());
        self.per_test.push(lines);
    }
}
