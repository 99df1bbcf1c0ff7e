// SPDX-License-Identifier: Apache-2.0

use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::game::{Command, GameState, MutantId, PlayerId};
use crate::lang::{evaluate_call, Outcome, Type, TypedUnit, Value};
use crate::mutation::MutantCandidate;
use crate::runner::{
    bounded_equivalence_oracle, kill_check_against_expected, Assertion, Domain, EquivalenceVerdict,
    ValidTest,
};

/// Submits enumerated candidates in random order and answers claims on its
/// own mutants with an oracle counterexample when one exists.
pub struct AttackerBot {
    pub player: PlayerId,
    remaining: Vec<MutantCandidate>,
    /// Claims already examined and found uncounterable.
    given_up: Vec<MutantId>,
}

impl AttackerBot {
    pub fn new(player: PlayerId, candidates: Vec<MutantCandidate>) -> Self {
        AttackerBot {
            player,
            remaining: candidates,
            given_up: Vec::new(),
        }
    }

    pub fn next_move(&mut self, state: &GameState, rng: &mut ChaCha8Rng) -> Option<Command> {
        if let Some(cmd) = self.counter(state) {
            return Some(cmd);
        }
        if self.remaining.is_empty() {
            return None;
        }
        let i = rng.random_range(0..self.remaining.len());
        let pick = self.remaining.swap_remove(i);
        Some(Command::SubmitMutant {
            player: self.player,
            source: pick.mutated_source,
            submission_id: None,
        })
    }

    fn counter(&mut self, state: &GameState) -> Option<Command> {
        let budget = state.config().step_budget;
        let original = state.unit();
        let claimed: Vec<MutantId> = state
            .mutants
            .values()
            .filter(|m| m.attacker == self.player && state.open_claim(m.id).is_some())
            .filter(|m| !self.given_up.contains(&m.id))
            .map(|m| m.id)
            .collect();
        for id in claimed {
            let mutant = &state.mutants[&id].unit;
            for f in original.functions() {
                let domain = Domain::default_for(f);
                let Ok(verdict) = bounded_equivalence_oracle(original, mutant, &f.name, &domain, budget) else {
                    continue;
                };
                if let EquivalenceVerdict::Counterexample {
                    function,
                    args,
                    original: Outcome::Value(expected),
                    ..
                } = verdict
                {
                    return Some(Command::CounterClaim {
                        player: self.player,
                        mutant: id,
                        assertions: vec![Assertion::new(function, args, expected)],
                        submission_id: None,
                    });
                }
            }
            self.given_up.push(id);
        }
        None
    }
}

/// Tries up to `attempts` random single-assertion tests per turn and submits
/// the first that kills a live mutant or covers a new line. Failing that,
/// claims the lowest-id live, unclaimed mutant (when enabled).
pub struct DefenderBot {
    pub player: PlayerId,
    pub attempts: u32,
    pub claims: bool,
}

impl DefenderBot {
    pub fn next_move(&self, state: &GameState, rng: &mut ChaCha8Rng) -> Option<Command> {
        let original = state.unit();
        let budget = state.config().step_budget;
        for _ in 0..self.attempts {
            let Some(assertion) = random_assertion(original, budget, rng) else {
                continue;
            };
            let (_, trace) = evaluate_call(original, &assertion.function, &assertion.args, budget)
                .expect("sampled from the signature");
            let candidate = ValidTest {
                assertions: vec![assertion],
                covered_lines: trace.covered_lines,
            };
            let new_coverage = !candidate
                .covered_lines
                .is_subset(&state.coverage.suite_covered_lines);
            let kills = state
                .mutants
                .values()
                .filter(|m| m.is_alive())
                .any(|m| kill_check_against_expected(&m.unit, &candidate, budget).is_killed());
            if kills || new_coverage {
                return Some(Command::SubmitTest {
                    player: self.player,
                    assertions: candidate.assertions,
                    submission_id: None,
                });
            }
        }
        if self.claims {
            let target = state
                .mutants
                .values()
                .find(|m| m.is_alive() && !state.claims.contains_key(&m.id));
            if let Some(m) = target {
                return Some(Command::ClaimEquivalence {
                    player: self.player,
                    mutant: m.id,
                    submission_id: None,
                });
            }
        }
        None
    }
}

/// A call with arguments drawn from the default oracle domain and the
/// original's result as the expected value; `None` if the original traps.
fn random_assertion(unit: &TypedUnit, budget: u64, rng: &mut ChaCha8Rng) -> Option<Assertion> {
    let f = unit.functions().choose(rng)?;
    let (lo, hi) = Domain::DEFAULT_INT;
    let args: Vec<Value> = f
        .params
        .iter()
        .map(|p| match p.ty {
            Type::Int => Value::Int(rng.random_range(lo..=hi)),
            Type::Bool => Value::Bool(rng.random_bool(0.5)),
            Type::IntArray => {
                let len = rng.random_range(0..=3);
                Value::IntArray((0..len).map(|_| rng.random_range(-2..=2)).collect())
            }
        })
        .collect();
    match evaluate_call(unit, &f.name, &args, budget) {
        Ok((Outcome::Value(v), _)) => Some(Assertion::new(f.name.clone(), args, v)),
        _ => None,
    }
}
