// SPDX-License-Identifier: Apache-2.0

//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails. Expected values come from the oracles in
//! `support/`, never from the code under test.

mod support;

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;
use std::process::{Command as Process, ExitCode};
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use arena_core::analytics::{statements_for_log, AnalyticsStatement, RemoteSink, Tracker, TrackerConfig, TrackerError};
use arena_core::game::{
    parse_log, parse_log_lenient, replay_events, replay_log, scoreboard, Actor, Command, EventPayload, Game,
    GameEvent, LogicalClock, MutantState, PlayerId,
};
use arena_core::lang::{compile, evaluate_call, Outcome, TrapKind, DEFAULT_STEP_BUDGET};
use arena_core::mutation::{ast_edit_summary, enumerate_mutants, MutationOperator};
use arena_core::runner::{bounded_equivalence_oracle, kill_check, validate_test, Assertion, Domain, KillResult};
use arena_core::server::GameStore;
use arena_core::sim::{run_simulation, SimConfig};
use arena_core::ABS_DIFF_SOURCE;

use support::gen::{self, Op, Prog, E, SK};
use support::reference::{self, RV};
use support::{canonical_source, scanner};

const GOLDEN: &str = include_str!("../fixtures/golden_game.ndjson");

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("interpreter differential oracle", differential_oracle),
        ("mutation enumeration counts", enumeration_counts),
        ("kill/coverage soundness", kill_coverage_soundness),
        ("equivalence oracle ground truth", equivalence_ground_truth),
        ("scoring anchors", scoring_anchors),
        ("replay determinism", replay_determinism),
        ("analytics completeness", analytics_completeness),
        ("simulation scale", simulation_scale),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let started = Instant::now();
        let result = check();
        let secs = started.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS  {name}: {detail} [{secs:.2} s]"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name}: {detail} [{secs:.2} s]");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criterion/criteria failed");
        ExitCode::FAILURE
    }
}

fn values(args: &[RV]) -> Vec<arena_core::lang::Value> {
    args.iter().map(RV::to_value).collect()
}

fn rendered(p: &Prog) -> String {
    let mut q = p.clone();
    gen::render(&mut q)
}

/// 1,000 generated programs, 10 calls each: outcome, coverage and step
/// count must match the reference evaluator exactly.
fn differential_oracle() -> Check {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
    let mut disagreements = Vec::new();
    let (mut runs, mut traps) = (0u32, 0u32);
    for program in 0..1000 {
        let mut p = gen::program(&mut rng);
        let src = gen::render(&mut p);
        let unit = compile(&src).map_err(|e| format!("program {program} does not compile: {e}\n{src}"))?;
        for _ in 0..10 {
            let f = if rng.random_bool(0.5) {
                p.funs.last().unwrap()
            } else {
                &p.funs[rng.random_range(0..p.funs.len())]
            };
            let budget = if rng.random_range(0..5) == 0 {
                rng.random_range(0..60)
            } else {
                10_000
            };
            let args = gen::args(&mut rng, f);
            let want = reference::run(&p, &f.name, &args, budget);
            let (outcome, trace) =
                evaluate_call(&unit, &f.name, &values(&args), budget).map_err(|e| e.to_string())?;
            runs += 1;
            if want.outcome.is_err() {
                traps += 1;
            }
            if outcome != want.outcome_value() || trace.covered_lines != want.covered || trace.steps_used != want.steps
            {
                disagreements.push(format!(
                    "program {program} {}({:?}) budget {budget}: got {outcome:?} {:?} {} want {:?} {:?} {}\n{src}",
                    f.name,
                    args,
                    trace.covered_lines,
                    trace.steps_used,
                    want.outcome,
                    want.covered,
                    want.steps
                ));
            }
        }
    }
    let secs = started.elapsed().as_secs_f64();
    ensure(disagreements.is_empty(), || {
        format!("{} disagreements; first: {}", disagreements.len(), disagreements[0])
    })?;
    ensure(secs < 60.0, || format!("took {secs:.1} s, limit 60 s"))?;
    Ok(format!("{runs} calls ({traps} trapping), 0 disagreements"))
}

fn production_set(src: &str, ops: &[MutationOperator]) -> Result<(usize, BTreeSet<(String, String)>), String> {
    let unit = compile(src).map_err(|e| e.to_string())?;
    let candidates = enumerate_mutants(&unit, ops);
    let mut set = BTreeSet::new();
    for c in &candidates {
        let canon = canonical_source(&c.mutated_source)
            .ok_or_else(|| format!("candidate does not compile: {}", c.mutated_source))?;
        set.insert((c.operator.as_str().to_string(), canon));
    }
    Ok((candidates.len(), set))
}

fn scanner_set(p: &Prog, ops: &[&str]) -> Result<BTreeSet<(String, String)>, String> {
    let mut set = BTreeSet::new();
    for m in scanner::scan(p, ops) {
        let text = rendered(&m.prog);
        let canon = canonical_source(&text).ok_or_else(|| format!("scanner mutant does not compile:\n{text}"))?;
        set.insert((m.operator.to_string(), canon));
    }
    Ok(set)
}

fn per_operator(set: &BTreeSet<(String, String)>) -> BTreeMap<String, usize> {
    let mut out = BTreeMap::new();
    for (op, _) in set {
        *out.entry(op.clone()).or_insert(0) += 1;
    }
    out
}

/// abs_diff counts, then per-operator counts and exact candidate sets on a
/// corpus, all against the site scanner.
fn enumeration_counts() -> Check {
    use MutationOperator::*;
    let abs = gen::abs_diff();
    let count = |ops: &[MutationOperator]| production_set(ABS_DIFF_SOURCE, ops).map(|r| r.0);
    let aor = count(&[Aor])?;
    let ror = count(&[Ror])?;
    let both = count(&[Aor, Ror])?;
    let all = count(&MutationOperator::ALL)?;
    let extra = scanner::scan(&abs, &["LOR", "UOI", "CRP", "SDL"]).len();
    ensure(aor == 8, || format!("abs_diff AOR = {aor}, want 8"))?;
    ensure(ror == 5, || format!("abs_diff ROR = {ror}, want 5"))?;
    ensure(both == 13, || format!("abs_diff AOR+ROR = {both}, want 13"))?;
    ensure(all == 13 + extra, || format!("abs_diff all = {all}, want 13 + {extra}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0002);
    let mut total = 0;
    let mut corpus = 0;
    while corpus < 20 {
        let mut p = gen::program(&mut rng);
        let src = gen::render(&mut p);
        if scanner::scan(&p, &scanner::ALL_OPS).len() < 10 {
            continue;
        }
        corpus += 1;
        let (n, got) = production_set(&src, &MutationOperator::ALL)?;
        let want = scanner_set(&p, &scanner::ALL_OPS)?;
        ensure(n == got.len(), || {
            format!("corpus program {corpus}: {} duplicate candidates\n{src}", n - got.len())
        })?;
        ensure(per_operator(&got) == per_operator(&want), || {
            format!(
                "corpus program {corpus}: per-operator counts {:?}, scanner {:?}\n{src}",
                per_operator(&got),
                per_operator(&want)
            )
        })?;
        if got != want {
            let missing: Vec<_> = want.difference(&got).take(2).collect();
            let extra: Vec<_> = got.difference(&want).take(2).collect();
            return Err(format!(
                "corpus program {corpus}: sets differ; missing {missing:?}, unexpected {extra:?}\n{src}"
            ));
        }
        total += n;
    }
    Ok(format!(
        "abs_diff AOR 8, ROR 5, all {all} (13 + {extra} scanned); 20 programs, {total} candidates match the scanner, 0 duplicates"
    ))
}

/// Random (mutant, test) pairs: a kill requires the killing assertion to
/// execute the mutated line, so mutants on uncovered lines never die.
fn kill_coverage_soundness() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0003);
    let mut pairs = 0;
    let mut kills = 0;
    let mut uncovered = 0;
    let mut violations = Vec::new();
    while pairs < 500 {
        let mut p = gen::program(&mut rng);
        let src = gen::render(&mut p);
        let original = compile(&src).map_err(|e| e.to_string())?;
        let mutants = scanner::scan(&p, &scanner::ALL_OPS);
        if mutants.is_empty() {
            continue;
        }
        let m = &mutants[rng.random_range(0..mutants.len())];
        let mut assertions = Vec::new();
        let mut coverage = Vec::new();
        for _ in 0..rng.random_range(1..=3) {
            let f = &p.funs[rng.random_range(0..p.funs.len())];
            let args = gen::args(&mut rng, f);
            let run = reference::run(&p, &f.name, &args, DEFAULT_STEP_BUDGET);
            if let Ok(v) = &run.outcome {
                assertions.push(Assertion::new(f.name.clone(), values(&args), v.to_value()));
                coverage.push(run.covered);
            }
        }
        if assertions.is_empty() {
            continue;
        }
        let test = validate_test(&original, &assertions, DEFAULT_STEP_BUDGET)
            .map_err(|e| format!("reference-valid test rejected: {e}\n{src}"))?;
        let mutant_src = rendered(&m.prog);
        let mutant = compile(&mutant_src).map_err(|e| format!("{e}\n{mutant_src}"))?;
        if m.operator != "SDL" {
            // Same layout as the original, so the diff must point at the site.
            let edited = ast_edit_summary(&original, &mutant).edited_lines;
            if edited != BTreeSet::from([m.line]) {
                violations.push(format!("{} at line {}: diff reports lines {edited:?}", m.operator, m.line));
            }
        }
        pairs += 1;
        let suite: BTreeSet<u32> = coverage.iter().flatten().copied().collect();
        let result = kill_check(&original, &mutant, &test, DEFAULT_STEP_BUDGET);
        if !suite.contains(&m.line) {
            uncovered += 1;
        }
        match result {
            KillResult::Killed(i) => {
                kills += 1;
                if !coverage[i].contains(&m.line) {
                    violations.push(format!(
                        "{} at line {} killed by assertion {i} covering {:?}\n{src}",
                        m.operator, m.line, coverage[i]
                    ));
                }
            }
            KillResult::Survived => {}
        }
    }
    ensure(violations.is_empty(), || {
        format!("{} violations; first: {}", violations.len(), violations[0])
    })?;
    Ok(format!(
        "{pairs} pairs, {kills} kills, {uncovered} with the edit on an uncovered line, 0 violations"
    ))
}

/// The 13 AOR/ROR mutants of abs_diff over [-8, 8]^2: exactly `a >= b` is
/// equivalent (confirmed by brute force on the reference evaluator), and
/// every counterexample becomes a valid killing test.
fn equivalence_ground_truth() -> Check {
    let abs = gen::abs_diff();
    let mut brute_equivalent = Vec::new();
    for m in scanner::scan(&abs, &["AOR", "ROR"]) {
        let differs = (-8..=8).any(|a| {
            (-8..=8).any(|b| {
                let args = [RV::I(a), RV::I(b)];
                reference::run(&abs, "abs_diff", &args, DEFAULT_STEP_BUDGET).outcome
                    != reference::run(&m.prog, "abs_diff", &args, DEFAULT_STEP_BUDGET).outcome
            })
        });
        if !differs {
            brute_equivalent.push(m);
        }
    }
    ensure(brute_equivalent.len() == 1, || {
        format!("reference brute force finds {} equivalent mutants", brute_equivalent.len())
    })?;
    let SK::If(E::Bin(Op::Ge, ..), ..) = &brute_equivalent[0].prog.funs[0].body[0].kind else {
        return Err("reference brute force: the equivalent mutant is not `a >= b`".into());
    };
    let want = canonical_source(&rendered(&brute_equivalent[0].prog)).expect("compiles");

    let started = Instant::now();
    let original = compile(ABS_DIFF_SOURCE).map_err(|e| e.to_string())?;
    let f = original.function("abs_diff").expect("abs_diff");
    let domain = Domain::with_int_range(f, -8, 8);
    let candidates = enumerate_mutants(&original, &[MutationOperator::Aor, MutationOperator::Ror]);
    ensure(candidates.len() == 13, || format!("{} candidates, want 13", candidates.len()))?;
    let mut equivalent = Vec::new();
    for c in &candidates {
        let mutant = compile(&c.mutated_source).map_err(|e| e.to_string())?;
        let verdict = bounded_equivalence_oracle(&original, &mutant, "abs_diff", &domain, DEFAULT_STEP_BUDGET)
            .map_err(|e| e.to_string())?;
        match verdict {
            arena_core::runner::EquivalenceVerdict::Equivalent { tuples_checked, .. } => {
                ensure(tuples_checked == 289, || format!("checked {tuples_checked} tuples, want 289"))?;
                equivalent.push(canonical_source(&c.mutated_source).expect("compiles"));
            }
            arena_core::runner::EquivalenceVerdict::Counterexample { args, original: Outcome::Value(v), .. } => {
                let test = validate_test(&original, &[Assertion::new("abs_diff", args.clone(), v)], DEFAULT_STEP_BUDGET)
                    .map_err(|e| format!("counterexample {args:?} does not validate: {e}"))?;
                ensure(kill_check(&original, &mutant, &test, DEFAULT_STEP_BUDGET).is_killed(), || {
                    format!("counterexample {args:?} does not kill {}", c.mutated_fragment)
                })?;
            }
            other => return Err(format!("unexpected verdict {other}")),
        }
    }
    let secs = started.elapsed().as_secs_f64();
    ensure(equivalent == vec![want], || format!("oracle finds {} equivalent mutants", equivalent.len()))?;
    ensure(secs < 5.0, || format!("oracle took {secs:.2} s, limit 5 s"))?;
    Ok(format!("1 of 13 equivalent (a >= b), 12 counterexamples kill; oracle {secs:.2} s"))
}

fn player(e: &GameEvent) -> Option<PlayerId> {
    match e.actor {
        Actor::Player(p) => Some(p),
        Actor::System => None,
    }
}

/// Scores a log from the rules alone: a survival pays the attacker 1, a kill
/// pays the test's author 1 plus the mutant's accrued points, a counter pays
/// the attacker 1, an upheld claim moves the accrued points (capped at the
/// attacker's balance) away and pays the claimant 1.
fn score_log(events: &[GameEvent]) -> BTreeMap<PlayerId, i64> {
    let mut points = BTreeMap::new();
    let mut attacker = BTreeMap::new();
    let mut accrued = BTreeMap::new();
    let mut author = BTreeMap::new();
    let mut claimant = BTreeMap::new();
    for e in events {
        match &e.payload {
            EventPayload::PlayerJoined { player, .. } => {
                points.insert(*player, 0i64);
            }
            EventPayload::MutantAccepted { mutant, .. } => {
                attacker.insert(*mutant, player(e).unwrap());
                accrued.insert(*mutant, 0i64);
            }
            EventPayload::TestAccepted { test, .. } => {
                author.insert(*test, player(e).unwrap());
            }
            EventPayload::MutantSurvivedTest { mutant, .. } => {
                *points.get_mut(&attacker[mutant]).unwrap() += 1;
                *accrued.get_mut(mutant).unwrap() += 1;
            }
            EventPayload::MutantKilled { mutant, test } => {
                *points.get_mut(&author[test]).unwrap() += 1 + accrued[mutant];
            }
            EventPayload::EquivalenceClaimed { mutant, .. } => {
                claimant.insert(*mutant, player(e).unwrap());
            }
            EventPayload::ClaimCountered { mutant, .. } => {
                *points.get_mut(&attacker[mutant]).unwrap() += 1;
            }
            EventPayload::ClaimUpheld { mutant } => {
                let a = attacker[mutant];
                let lost = accrued[mutant].min(points[&a].max(0));
                *points.get_mut(&a).unwrap() -= lost;
                *points.get_mut(&claimant[mutant]).unwrap() += 1;
            }
            _ => {}
        }
    }
    points
}

fn simulate(n: u32, data_dir: Option<&Path>) -> Result<Vec<Game>, String> {
    run_simulation("abs_diff", ABS_DIFF_SOURCE, n, 42, &SimConfig::default(), data_dir)
        .map(|r| r.1)
        .map_err(|e| e.to_string())
}

/// Accrued points equal survivals for live mutants, stillborn mutants pay
/// nothing, and a rules-only scorer reproduces every scoreboard.
fn scoring_anchors() -> Check {
    let games = simulate(100, None)?;
    let (mut alive, mut stillborn) = (0, 0);
    for g in &games {
        let state = g.state();
        let tests_accepted = g
            .events()
            .iter()
            .filter(|e| matches!(e.payload, EventPayload::TestAccepted { .. }))
            .count();
        for m in state.mutants.values() {
            let survivals = g
                .events()
                .iter()
                .filter(|e| matches!(e.payload, EventPayload::MutantSurvivedTest { mutant, .. } if mutant == m.id))
                .count();
            match m.state {
                MutantState::Alive => {
                    alive += 1;
                    let a = m.accrued_points as usize;
                    ensure(a == m.survived_tests.len() && a == survivals && a == tests_accepted, || {
                        format!(
                            "{} {}: accrued {a}, survived_tests {}, survival events {survivals}, tests {tests_accepted}",
                            state.game_id,
                            m.id,
                            m.survived_tests.len()
                        )
                    })?;
                }
                MutantState::Stillborn { .. } => {
                    stillborn += 1;
                    ensure(m.points == 0 && survivals == 0, || {
                        format!("{} {}: stillborn mutant earned {}", state.game_id, m.id, m.points)
                    })?;
                }
                _ => {}
            }
        }
        let want = score_log(g.events());
        let got: BTreeMap<PlayerId, i64> = scoreboard(state).players.iter().map(|p| (p.player, p.points)).collect();
        ensure(got == want, || format!("{}: scoreboard {got:?}, rules give {want:?}", state.game_id))?;
    }
    let golden = replay_log(GOLDEN).map_err(|e| e.to_string())?;
    let by_name = scoreboard(golden.state()).by_name();
    let want_golden = BTreeMap::from([("A".to_string(), 2), ("D1".to_string(), 2), ("D2".to_string(), 0)]);
    ensure(by_name == want_golden, || format!("golden scoreboard {by_name:?}"))?;
    let rules: BTreeMap<String, i64> = score_log(golden.events())
        .into_iter()
        .map(|(p, v)| (golden.state().player(p).unwrap().name.clone(), v))
        .collect();
    ensure(rules == want_golden, || format!("rules-only golden scoreboard {rules:?}"))?;
    ensure(stillborn > 0 && alive > 0, || format!("vacuous: {alive} alive, {stillborn} stillborn"))?;
    Ok(format!(
        "100 games: {alive} live mutants with accrued = survivals, {stillborn} stillborn at 0, scoreboards match; golden A 2, D1 2, D2 0"
    ))
}

/// Persisted logs replay to byte-identical states; cutting each log's last
/// line in half recovers the prefix, both directly and through the store.
fn replay_determinism() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let games = simulate(100, Some(dir.path()))?;
    let games_dir = dir.path().join("games");
    let mut prefixes = BTreeMap::new();
    for g in &games {
        let id = &g.state().game_id;
        let path = games_dir.join(format!("{id}.ndjson"));
        let text = fs::read_to_string(&path).map_err(|e| e.to_string())?;
        let live = g.state().to_canonical_json();
        for _ in 0..2 {
            let replayed = replay_log(&text).map_err(|e| format!("{id}: {e}"))?;
            ensure(replayed.state().to_canonical_json() == live, || format!("{id}: replayed state differs"))?;
        }
        let events = parse_log(&text).map_err(|e| e.to_string())?;
        let n = events.len();
        let prefix = Game::replay(events[..n - 1].to_vec()).map_err(|e| e.to_string())?;
        let last_start = text[..text.len() - 1].rfind('\n').map_or(0, |i| i + 1);
        let cut = last_start + (text.len() - last_start) / 2;
        let truncated = &text[..cut];
        let lenient = parse_log_lenient(truncated).map_err(|e| e.to_string())?;
        ensure(lenient.events.len() == n - 1 && lenient.dropped_partial_line.is_some(), || {
            format!("{id}: lenient parse kept {} of {} events", lenient.events.len(), n)
        })?;
        let recovered = replay_events(lenient.events).map_err(|e| e.to_string())?;
        ensure(recovered.state().to_canonical_json() == prefix.state().to_canonical_json(), || {
            format!("{id}: recovered state differs from the prefix fold")
        })?;
        fs::write(&path, truncated).map_err(|e| e.to_string())?;
        prefixes.insert(id.clone(), prefix.state().to_canonical_json());
    }
    let store = GameStore::open(dir.path(), Tracker::disabled(), Arc::new(LogicalClock::default()))
        .map_err(|e| e.to_string())?;
    ensure(store.game_ids().len() == 100, || format!("store recovered {} games", store.game_ids().len()))?;
    for (id, want) in &prefixes {
        let got = store.snapshot(id).map_err(|e| e.to_string())?.state().to_canonical_json();
        ensure(&got == want, || format!("{id}: store recovery differs from the prefix fold"))?;
    }
    Ok("100 logs replay byte-identically; 100 truncated logs recover their prefix".into())
}

struct DownSink;

impl RemoteSink for DownSink {
    fn send(&self, _batch: &[AnalyticsStatement]) -> Result<(), TrackerError> {
        Err(TrackerError::SinkUnavailable("stub sink is down".into()))
    }
}

/// The commands a log records, in order; consequences and the creation
/// event are produced by the engine rather than requested.
fn commands(events: &[GameEvent]) -> Vec<Command> {
    let mut out = Vec::new();
    for e in events.iter().skip(1) {
        if e.payload.is_consequence() {
            continue;
        }
        let p = player(e);
        out.push(match e.payload.clone() {
            EventPayload::PlayerJoined {
                name,
                role,
                team,
                token_digest,
                ..
            } => Command::Join {
                name,
                role,
                team,
                token_digest,
            },
            EventPayload::MutantAccepted { source, submission_id, .. }
            | EventPayload::MutantRejected { source, submission_id, .. } => Command::SubmitMutant {
                player: p.unwrap(),
                source,
                submission_id,
            },
            EventPayload::TestAccepted {
                assertions,
                submission_id,
                ..
            }
            | EventPayload::TestRejected {
                assertions,
                submission_id,
                ..
            } => Command::SubmitTest {
                player: p.unwrap(),
                assertions,
                submission_id,
            },
            EventPayload::EquivalenceClaimed { mutant, submission_id } => Command::ClaimEquivalence {
                player: p.unwrap(),
                mutant,
                submission_id,
            },
            EventPayload::ClaimCountered {
                mutant,
                assertions,
                submission_id,
            }
            | EventPayload::CounterRejected {
                mutant,
                assertions,
                submission_id,
                ..
            } => Command::CounterClaim {
                player: p.unwrap(),
                mutant,
                assertions,
                submission_id,
            },
            EventPayload::GameFinished { reason } => Command::Finish { reason },
            other => panic!("unexpected command event {other:?}"),
        });
    }
    out
}

fn play_through_store(store: &GameStore, game: &Game) -> Result<(String, String), String> {
    let (id, _) = store.create(game.state().config().clone()).map_err(|e| e.to_string())?;
    for cmd in commands(game.events()) {
        store.execute(&id, &cmd).map_err(|e| e.to_string())?;
    }
    let state = store.snapshot(&id).map_err(|e| e.to_string())?.state().to_canonical_json();
    Ok((state.replace(&id, "GAME"), id))
}

/// One statement per event, a complete local log while the remote sink is
/// down, and identical outcomes with tracking on or off.
fn analytics_completeness() -> Check {
    let games = simulate(100, None)?;
    let mut statements = 0;
    for g in &games {
        let s = statements_for_log(g.events());
        // Every event kind is tracked; none is bookkeeping-only.
        ensure(s.len() == g.events().len(), || {
            format!("{}: {} statements for {} events", g.state().game_id, s.len(), g.events().len())
        })?;
        let seqs: Vec<u64> = s.iter().filter_map(AnalyticsStatement::seq).collect();
        let want: Vec<u64> = g.events().iter().map(|e| e.seq).collect();
        ensure(seqs == want, || format!("{}: statement seqs out of order", g.state().game_id))?;
        statements += s.len();
    }

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let log_dir = dir.path().join("analytics");
    let tracked = Tracker::new(TrackerConfig {
        log_dir: Some(log_dir.clone()),
        remote: Some(Box::new(DownSink)),
        ..TrackerConfig::default()
    });
    let open = |name: String, tracker: Tracker| {
        GameStore::open(&dir.path().join(name), tracker, Arc::new(LogicalClock::default())).map_err(|e| e.to_string())
    };
    let mut local_lines = 0;
    for (i, g) in games.iter().take(25).enumerate() {
        // A store per game, so each starts from the clock the simulation used.
        let on = open(format!("on-{i}"), tracked.clone())?;
        let off = open(format!("off-{i}"), Tracker::disabled())?;
        let (with, id) = play_through_store(&on, g)?;
        let (without, _) = play_through_store(&off, g)?;
        let sim = g.state().to_canonical_json().replace(&g.state().game_id, "GAME");
        ensure(with == without && with == sim, || {
            format!("{}: outcomes differ with tracking on, off and in the simulation", g.state().game_id)
        })?;
        let log = fs::read_to_string(log_dir.join(format!("{id}.ndjson"))).map_err(|e| e.to_string())?;
        let events = on.snapshot(&id).map_err(|e| e.to_string())?.events().to_vec();
        let want: Vec<String> = statements_for_log(&events).iter().map(|s| s.to_canonical_json()).collect();
        let got: Vec<&str> = log.lines().collect();
        ensure(got == want, || format!("{id}: local statement log is incomplete or differs"))?;
        local_lines += got.len();
    }
    let delivery = tracked.flush_with(true);
    ensure(delivery.delivered == 0 && delivery.pending > 0 && !delivery.local_failed, || {
        format!("unexpected delivery state {delivery:?}")
    })?;
    Ok(format!(
        "{statements} statements for 100 games; sink down: {local_lines} local lines kept, {} pending; 25 games identical with tracking on/off",
        delivery.pending
    ))
}

/// `arena sim --games 100 --seed 42` through the binary, with the per-game
/// scores recomputed from the logs by the reference evaluator.
fn simulation_scale() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let unit = dir.path().join("abs_diff.cut");
    fs::write(&unit, ABS_DIFF_SOURCE).map_err(|e| e.to_string())?;
    let data = dir.path().join("data");
    let started = Instant::now();
    let out = Process::new(env!("CARGO_BIN_EXE_arena"))
        .args(["sim", "--games", "100", "--seed", "42", "--unit"])
        .arg(&unit)
        .arg("--data-dir")
        .arg(&data)
        .output()
        .map_err(|e| e.to_string())?;
    let secs = started.elapsed().as_secs_f64();
    ensure(out.status.success(), || String::from_utf8_lossy(&out.stderr).into_owned())?;
    ensure(secs < 60.0, || format!("took {secs:.1} s, limit 60 s"))?;
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())?;
    ensure(report["games_played"] == 100, || format!("games_played {}", report["games_played"]))?;

    let abs = gen::abs_diff();
    let mutants = scanner::scan(&abs, &["AOR", "ROR"]);
    ensure(mutants.len() == 13, || format!("scanner finds {} AOR/ROR mutants", mutants.len()))?;
    let mut full = 0;
    for g in report["games"].as_array().ok_or("report has no games")? {
        let id = g["game_id"].as_str().ok_or("game without id")?;
        let text = fs::read_to_string(data.join("games").join(format!("{id}.ndjson"))).map_err(|e| e.to_string())?;
        let mut suite = Vec::new();
        for e in parse_log(&text).map_err(|e| e.to_string())? {
            match e.payload {
                EventPayload::TestAccepted { assertions, .. } | EventPayload::ClaimCountered { assertions, .. } => {
                    suite.extend(assertions)
                }
                _ => {}
            }
        }
        let killed = mutants
            .iter()
            .filter(|m| {
                suite.iter().any(|a| {
                    let args: Vec<RV> = a.args.iter().map(RV::from_value).collect();
                    let run = reference::run(&m.prog, &a.function, &args, DEFAULT_STEP_BUDGET);
                    run.outcome != Ok::<RV, TrapKind>(RV::from_value(&a.expected))
                })
            })
            .count();
        ensure(g["killed"] == killed as u64 && g["candidates"] == 13, || {
            format!("{id}: report says {}/{}, reference says {killed}/13", g["killed"], g["candidates"])
        })?;
        if killed == 12 {
            full += 1;
        }
    }
    ensure(full >= 90, || format!("{full} of 100 games reach 12/13, need 90"))?;
    Ok(format!("{full} of 100 games reach 12/13 (recomputed by the reference evaluator) in {secs:.2} s"))
}
