// SPDX-License-Identifier: Apache-2.0

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::config::GameConfig;
use super::event::{EventPayload, FinishReason, GameEvent};
use super::ids::{Actor, MutantId, PlayerId, Role, TestId};
use super::GameError;
use crate::lang::{compile, SharedUnit};
use crate::runner::{Assertion, ValidTest};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GameStatus {
    NotCreated,
    Active,
    Finished,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PlayerRecord {
    pub id: PlayerId,
    pub name: String,
    pub role: Role,
    pub team: String,
    pub points: i64,
    #[serde(skip)]
    pub token_digest: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MutantState {
    Alive,
    /// Killed by the existing suite at submission.
    Stillborn { test: TestId },
    Killed { test: TestId },
    /// Killed by its attacker's counter to an equivalence claim.
    ProvenNonEquivalent,
    RemovedEquivalent,
}

#[derive(Debug, Clone, Serialize)]
pub struct MutantRecord {
    pub id: MutantId,
    pub attacker: PlayerId,
    pub source: String,
    pub edited_lines: BTreeSet<u32>,
    pub edited_node_count: u32,
    pub state: MutantState,
    pub accrued_points: u32,
    pub survived_tests: Vec<TestId>,
    /// Net points this mutant earned its attacker.
    pub points: i64,
    pub created_seq: u64,
    #[serde(skip)]
    pub unit: SharedUnit,
}

impl MutantRecord {
    pub fn is_alive(&self) -> bool {
        self.state == MutantState::Alive
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TestRecord {
    pub id: TestId,
    pub author: PlayerId,
    pub assertions: Vec<Assertion>,
    pub covered_lines: BTreeSet<u32>,
    pub points: i64,
    pub kills: Vec<MutantId>,
    pub created_seq: u64,
}

impl TestRecord {
    pub fn as_valid_test(&self) -> ValidTest {
        ValidTest {
            assertions: self.assertions.clone(),
            covered_lines: self.covered_lines.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ClaimStatus {
    Open,
    Countered,
    Upheld,
    /// The mutant was killed by a defender test while claimed.
    Moot,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Claim {
    pub mutant: MutantId,
    pub claimant: PlayerId,
    pub opened_seq: u64,
    pub defender_tests_since: u32,
    pub status: ClaimStatus,
}

/// Seq range of the events produced by one client submission.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SubmissionRange {
    pub first_seq: u64,
    pub last_seq: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct Coverage {
    pub per_test: BTreeMap<TestId, BTreeSet<u32>>,
    pub suite_covered_lines: BTreeSet<u32>,
}

/// Fold of a game's events. Serializing it (compact JSON, declaration
/// field order, ordered maps) gives the canonical form.
#[derive(Debug, Clone, Serialize)]
pub struct GameState {
    pub game_id: String,
    pub status: GameStatus,
    pub config: Option<GameConfig>,
    pub created_at: Option<String>,
    pub finished_at: Option<String>,
    pub finish_reason: Option<FinishReason>,
    pub last_seq: u64,
    pub players: BTreeMap<PlayerId, PlayerRecord>,
    pub mutants: BTreeMap<MutantId, MutantRecord>,
    pub tests: BTreeMap<TestId, TestRecord>,
    pub claims: BTreeMap<MutantId, Claim>,
    pub coverage: Coverage,
    pub submissions: BTreeMap<String, SubmissionRange>,
    #[serde(skip)]
    pub creator_token_digest: Option<String>,
    #[serde(skip)]
    unit: Option<SharedUnit>,
    #[serde(skip)]
    open_submission: Option<String>,
}

impl Default for GameState {
    fn default() -> Self {
        GameState {
            game_id: String::new(),
            status: GameStatus::NotCreated,
            config: None,
            created_at: None,
            finished_at: None,
            finish_reason: None,
            last_seq: 0,
            players: BTreeMap::new(),
            mutants: BTreeMap::new(),
            tests: BTreeMap::new(),
            claims: BTreeMap::new(),
            coverage: Coverage::default(),
            submissions: BTreeMap::new(),
            creator_token_digest: None,
            unit: None,
            open_submission: None,
        }
    }
}

pub fn submission_key(player: PlayerId, submission_id: &str) -> String {
    format!("{player}/{submission_id}")
}

pub fn token_digest(token: &str) -> String {
    hex::encode(Sha256::digest(token.as_bytes()))
}

impl GameState {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn is_active(&self) -> bool {
        self.status == GameStatus::Active
    }

    /// The original unit. Panics before `GameCreated`.
    pub fn unit(&self) -> &SharedUnit {
        self.unit.as_ref().expect("game created")
    }

    pub fn config(&self) -> &GameConfig {
        self.config.as_ref().expect("game created")
    }

    pub fn player(&self, id: PlayerId) -> Option<&PlayerRecord> {
        self.players.get(&id)
    }

    pub fn player_by_token_digest(&self, digest: &str) -> Option<&PlayerRecord> {
        self.players
            .values()
            .find(|p| p.token_digest.as_deref() == Some(digest))
    }

    pub fn open_claim(&self, mutant: MutantId) -> Option<&Claim> {
        self.claims
            .get(&mutant)
            .filter(|c| c.status == ClaimStatus::Open)
    }

    pub fn next_player_id(&self) -> PlayerId {
        PlayerId(self.players.len() as u32 + 1)
    }

    pub fn next_mutant_id(&self) -> MutantId {
        MutantId(self.mutants.len() as u32 + 1)
    }

    pub fn next_test_id(&self) -> TestId {
        TestId(self.tests.len() as u32 + 1)
    }

    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string(self).expect("state always serializes")
    }

    /// SHA-256 of the canonical form, hex encoded.
    pub fn state_hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_canonical_json().as_bytes()))
    }

    fn add_points(&mut self, player: PlayerId, delta: i64) {
        if let Some(p) = self.players.get_mut(&player) {
            p.points += delta;
        }
    }
}

fn inconsistent(msg: impl Into<String>) -> GameError {
    GameError::InconsistentEvent(msg.into())
}

/// Pure transition. On error `state` is returned untouched.
pub fn apply_event(state: &GameState, event: &GameEvent) -> Result<GameState, GameError> {
    let mut next = state.clone();
    apply_in_place(&mut next, event)?;
    Ok(next)
}

/// Validates `event` against `state` and applies it. All checks run before
/// the first write, so an error leaves `state` as it was.
pub(crate) fn apply_in_place(state: &mut GameState, event: &GameEvent) -> Result<(), GameError> {
    let expected = state.last_seq + 1;
    if event.seq != expected {
        return Err(GameError::OutOfOrderEvent {
            expected,
            got: event.seq,
        });
    }
    let created = matches!(event.payload, EventPayload::GameCreated { .. });
    if created != (state.status == GameStatus::NotCreated) {
        return Err(if created {
            inconsistent("game already created")
        } else {
            GameError::GameNotActive
        });
    }
    let upheld_after_finish = matches!(event.payload, EventPayload::ClaimUpheld { .. })
        && state.status == GameStatus::Finished;
    if !created && !state.is_active() && !upheld_after_finish {
        return Err(GameError::GameNotActive);
    }
    let actor = match event.actor {
        Actor::System => None,
        Actor::Player(p) => {
            if !state.players.contains_key(&p)
                && !matches!(event.payload, EventPayload::PlayerJoined { player, .. } if player == p)
            {
                return Err(GameError::ActorNotInGame(p));
            }
            Some(p)
        }
    };
    let require_role = |role: Role| -> Result<PlayerId, GameError> {
        let p = actor.ok_or_else(|| inconsistent("player event with system actor"))?;
        match state.players.get(&p) {
            Some(rec) if rec.role == role => Ok(p),
            Some(_) if role == Role::Attacker => Err(GameError::NotAttacker),
            Some(_) => Err(GameError::NotDefender),
            None => Err(GameError::ActorNotInGame(p)),
        }
    };

    match &event.payload {
        EventPayload::GameCreated {
            game_id,
            config,
            creator_token_digest,
        } => {
            config.validate()?;
            let unit = compile(&config.unit_source)
                .map_err(|e| GameError::InvalidUnit(e.to_string()))?
                .named(config.unit_name.clone());
            state.game_id = game_id.clone();
            state.status = GameStatus::Active;
            state.config = Some(config.clone());
            state.created_at = Some(event.timestamp.clone());
            state.creator_token_digest = creator_token_digest.clone();
            state.unit = Some(Arc::new(unit));
        }
        EventPayload::PlayerJoined {
            player,
            name,
            role,
            team,
            token_digest,
        } => {
            if Some(*player) != actor || *player != state.next_player_id() {
                return Err(inconsistent(format!("unexpected player id {player}")));
            }
            let same_role = state.players.values().filter(|p| p.role == *role).count();
            if same_role >= state.config().max_players_per_role as usize {
                return Err(GameError::RoleFull(*role));
            }
            state.players.insert(
                *player,
                PlayerRecord {
                    id: *player,
                    name: name.clone(),
                    role: *role,
                    team: team.clone(),
                    points: 0,
                    token_digest: token_digest.clone(),
                },
            );
        }
        EventPayload::MutantAccepted {
            mutant,
            source,
            edited_lines,
            edited_node_count,
            ..
        } => {
            let attacker = require_role(Role::Attacker)?;
            if *mutant != state.next_mutant_id() {
                return Err(inconsistent(format!("unexpected mutant id {mutant}")));
            }
            let unit = compile(source)
                .map_err(|e| inconsistent(format!("accepted mutant does not compile: {e}")))?
                .named(state.config().unit_name.clone());
            state.mutants.insert(
                *mutant,
                MutantRecord {
                    id: *mutant,
                    attacker,
                    source: source.clone(),
                    edited_lines: edited_lines.clone(),
                    edited_node_count: *edited_node_count,
                    state: MutantState::Alive,
                    accrued_points: 0,
                    survived_tests: Vec::new(),
                    points: 0,
                    created_seq: event.seq,
                    unit: Arc::new(unit),
                },
            );
        }
        EventPayload::MutantRejected { .. } => {
            require_role(Role::Attacker)?;
        }
        EventPayload::TestAccepted {
            test,
            assertions,
            covered_lines,
            ..
        } => {
            let author = require_role(Role::Defender)?;
            if *test != state.next_test_id() {
                return Err(inconsistent(format!("unexpected test id {test}")));
            }
            state.tests.insert(
                *test,
                TestRecord {
                    id: *test,
                    author,
                    assertions: assertions.clone(),
                    covered_lines: covered_lines.clone(),
                    points: 0,
                    kills: Vec::new(),
                    created_seq: event.seq,
                },
            );
            state.coverage.per_test.insert(*test, covered_lines.clone());
            state
                .coverage
                .suite_covered_lines
                .extend(covered_lines.iter().copied());
            for claim in state.claims.values_mut() {
                if claim.status == ClaimStatus::Open {
                    claim.defender_tests_since += 1;
                }
            }
        }
        EventPayload::TestRejected { .. } => {
            require_role(Role::Defender)?;
        }
        EventPayload::MutantKilled { mutant, test } => {
            let m = state
                .mutants
                .get(mutant)
                .ok_or(GameError::UnknownMutant(*mutant))?;
            if !m.is_alive() {
                return Err(GameError::MutantNotAlive(*mutant));
            }
            let t = state
                .tests
                .get(test)
                .ok_or_else(|| inconsistent(format!("unknown test {test}")))?;
            let at_birth = m.survived_tests.is_empty() && event.seq == m.created_seq + 1;
            let bonus = 1 + m.accrued_points as i64;
            let author = t.author;
            let m = state.mutants.get_mut(mutant).expect("checked");
            m.state = if at_birth {
                MutantState::Stillborn { test: *test }
            } else {
                MutantState::Killed { test: *test }
            };
            let t = state.tests.get_mut(test).expect("checked");
            t.points += bonus;
            t.kills.push(*mutant);
            state.add_points(author, bonus);
            if let Some(c) = state.claims.get_mut(mutant) {
                if c.status == ClaimStatus::Open {
                    c.status = ClaimStatus::Moot;
                }
            }
        }
        EventPayload::MutantSurvivedTest { mutant, test } => {
            let m = state
                .mutants
                .get(mutant)
                .ok_or(GameError::UnknownMutant(*mutant))?;
            if !m.is_alive() {
                return Err(GameError::MutantNotAlive(*mutant));
            }
            if state.open_claim(*mutant).is_some() {
                return Err(inconsistent(format!("{mutant} is frozen by a claim")));
            }
            if !state.tests.contains_key(test) {
                return Err(inconsistent(format!("unknown test {test}")));
            }
            let attacker = m.attacker;
            let m = state.mutants.get_mut(mutant).expect("checked");
            m.accrued_points += 1;
            m.points += 1;
            m.survived_tests.push(*test);
            state.add_points(attacker, 1);
        }
        EventPayload::EquivalenceClaimed { mutant, .. } => {
            let claimant = require_role(Role::Defender)?;
            let m = state
                .mutants
                .get(mutant)
                .ok_or(GameError::UnknownMutant(*mutant))?;
            if !m.is_alive() {
                return Err(GameError::MutantNotAlive(*mutant));
            }
            if state.open_claim(*mutant).is_some() {
                return Err(GameError::ClaimAlreadyOpen(*mutant));
            }
            state.claims.insert(
                *mutant,
                Claim {
                    mutant: *mutant,
                    claimant,
                    opened_seq: event.seq,
                    defender_tests_since: 0,
                    status: ClaimStatus::Open,
                },
            );
        }
        EventPayload::ClaimCountered { mutant, .. } | EventPayload::CounterRejected { mutant, .. } => {
            let attacker = require_role(Role::Attacker)?;
            let m = state
                .mutants
                .get(mutant)
                .ok_or(GameError::UnknownMutant(*mutant))?;
            if m.attacker != attacker {
                return Err(GameError::NotMutantOwner(*mutant));
            }
            if state.open_claim(*mutant).is_none() {
                return Err(GameError::NoOpenClaim(*mutant));
            }
            if matches!(event.payload, EventPayload::ClaimCountered { .. }) {
                let m = state.mutants.get_mut(mutant).expect("checked");
                m.state = MutantState::ProvenNonEquivalent;
                m.points += 1;
                state.claims.get_mut(mutant).expect("checked").status = ClaimStatus::Countered;
                state.add_points(attacker, 1);
            }
        }
        EventPayload::ClaimUpheld { mutant } => {
            let claim = state
                .open_claim(*mutant)
                .ok_or(GameError::NoOpenClaim(*mutant))?
                .clone();
            let m = state
                .mutants
                .get(mutant)
                .ok_or(GameError::UnknownMutant(*mutant))?;
            let attacker = m.attacker;
            let accrued = m.accrued_points as i64;
            let current = state.players.get(&attacker).map_or(0, |p| p.points);
            let deducted = accrued.min(current.max(0));
            let m = state.mutants.get_mut(mutant).expect("checked");
            m.state = MutantState::RemovedEquivalent;
            m.points -= deducted;
            state.add_points(attacker, -deducted);
            state.add_points(claim.claimant, 1);
            state.claims.get_mut(mutant).expect("checked").status = ClaimStatus::Upheld;
        }
        EventPayload::GameFinished { reason } => {
            state.status = GameStatus::Finished;
            state.finished_at = Some(event.timestamp.clone());
            state.finish_reason = Some(*reason);
        }
    }

    state.last_seq = event.seq;
    if let Some(sid) = event.payload.submission_id() {
        let key = submission_key(actor.unwrap_or(PlayerId(0)), sid);
        state.submissions.insert(
            key.clone(),
            SubmissionRange {
                first_seq: event.seq,
                last_seq: event.seq,
            },
        );
        state.open_submission = Some(key);
    } else if event.payload.is_consequence() {
        if let Some(key) = &state.open_submission {
            if let Some(r) = state.submissions.get_mut(key) {
                r.last_seq = event.seq;
            }
        }
    } else {
        state.open_submission = None;
    }
    Ok(())
}
