// SPDX-License-Identifier: Apache-2.0

use super::clock::Clock;
use super::config::GameConfig;
use super::event::{EventPayload, FinishReason, GameEvent};
use super::ids::{Actor, MutantId, PlayerId, Role, TestId};
use super::state::{apply_in_place, submission_key, GameState, SubmissionRange};
use super::GameError;
use crate::mutation::validate_mutant_submission;
use crate::runner::{kill_check_against_expected, validate_test, Assertion, KillResult, TestRejection};

/// A request against a game. Player identity is established by the caller
/// (the server maps tokens to players).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Command {
    Join {
        name: String,
        role: Role,
        team: String,
        token_digest: Option<String>,
    },
    SubmitMutant {
        player: PlayerId,
        source: String,
        submission_id: Option<String>,
    },
    SubmitTest {
        player: PlayerId,
        assertions: Vec<Assertion>,
        submission_id: Option<String>,
    },
    ClaimEquivalence {
        player: PlayerId,
        mutant: MutantId,
        submission_id: Option<String>,
    },
    CounterClaim {
        player: PlayerId,
        mutant: MutantId,
        assertions: Vec<Assertion>,
        submission_id: Option<String>,
    },
    Finish {
        reason: FinishReason,
    },
}

/// What a command would do, computed without touching the live state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Proposal {
    /// New events, in order, ready to persist and commit.
    Events(Vec<GameEvent>),
    /// The submission id was seen before; these are its original events.
    Duplicate(SubmissionRange),
}

/// A game: its folded state plus the log that produced it.
#[derive(Debug, Clone)]
pub struct Game {
    state: GameState,
    events: Vec<GameEvent>,
}

const NAME_LIMIT: usize = 64;

impl Game {
    /// Builds the `GameCreated` event for a new game.
    pub fn creation_event(
        game_id: &str,
        config: GameConfig,
        creator_token_digest: Option<String>,
        clock: &dyn Clock,
    ) -> Result<GameEvent, GameError> {
        let event = GameEvent {
            seq: 1,
            timestamp: clock.now(),
            actor: Actor::System,
            payload: EventPayload::GameCreated {
                game_id: game_id.to_string(),
                config,
                creator_token_digest,
            },
        };
        // Validate (config bounds, unit compiles) by applying to an empty state.
        apply_in_place(&mut GameState::empty(), &event)?;
        Ok(event)
    }

    pub fn create(
        game_id: &str,
        config: GameConfig,
        creator_token_digest: Option<String>,
        clock: &dyn Clock,
    ) -> Result<Game, GameError> {
        let event = Self::creation_event(game_id, config, creator_token_digest, clock)?;
        Game::replay([event])
    }

    /// Folds `events` from an empty state.
    pub fn replay(events: impl IntoIterator<Item = GameEvent>) -> Result<Game, GameError> {
        let mut game = Game {
            state: GameState::empty(),
            events: Vec::new(),
        };
        for e in events {
            game.apply_one(e)?;
        }
        Ok(game)
    }

    pub(crate) fn apply_one(&mut self, e: GameEvent) -> Result<(), GameError> {
        apply_in_place(&mut self.state, &e)?;
        self.events.push(e);
        Ok(())
    }

    pub fn state(&self) -> &GameState {
        &self.state
    }

    pub fn events(&self) -> &[GameEvent] {
        &self.events
    }

    pub fn events_since(&self, seq: u64) -> &[GameEvent] {
        let start = (seq as usize).min(self.events.len());
        &self.events[start..]
    }

    pub fn events_in(&self, range: SubmissionRange) -> &[GameEvent] {
        let lo = (range.first_seq as usize).saturating_sub(1).min(self.events.len());
        let hi = (range.last_seq as usize).min(self.events.len());
        &self.events[lo..hi]
    }

    /// Computes the events `cmd` produces. The live state is not modified.
    pub fn propose(&self, cmd: &Command, clock: &dyn Clock) -> Result<Proposal, GameError> {
        if let Some((player, sid)) = cmd.submission() {
            if let Some(range) = self.state.submissions.get(&submission_key(player, sid)) {
                return Ok(Proposal::Duplicate(*range));
            }
        }
        if !self.state.is_active() {
            return Err(GameError::GameNotActive);
        }
        let mut b = Batch {
            scratch: self.state.clone(),
            events: Vec::new(),
            timestamp: clock.now(),
        };
        match cmd {
            Command::Join {
                name,
                role,
                team,
                token_digest,
            } => {
                let name = name.trim();
                let team = team.trim();
                if name.is_empty() || name.chars().count() > NAME_LIMIT {
                    return Err(GameError::InvalidName(format!(
                        "name must be 1 to {NAME_LIMIT} characters"
                    )));
                }
                if team.is_empty() || team.chars().count() > NAME_LIMIT {
                    return Err(GameError::InvalidName(format!(
                        "team must be 1 to {NAME_LIMIT} characters"
                    )));
                }
                let player = b.scratch.next_player_id();
                b.push(
                    Actor::Player(player),
                    EventPayload::PlayerJoined {
                        player,
                        name: name.to_string(),
                        role: *role,
                        team: team.to_string(),
                        token_digest: token_digest.clone(),
                    },
                )?;
            }
            Command::SubmitMutant {
                player,
                source,
                submission_id,
            } => {
                b.require(*player, Role::Attacker)?;
                b.submit_mutant(*player, source, submission_id.clone())?;
            }
            Command::SubmitTest {
                player,
                assertions,
                submission_id,
            } => {
                b.require(*player, Role::Defender)?;
                b.submit_test(*player, assertions, submission_id.clone())?;
            }
            Command::ClaimEquivalence {
                player,
                mutant,
                submission_id,
            } => {
                b.require(*player, Role::Defender)?;
                b.push(
                    Actor::Player(*player),
                    EventPayload::EquivalenceClaimed {
                        mutant: *mutant,
                        submission_id: submission_id.clone(),
                    },
                )?;
            }
            Command::CounterClaim {
                player,
                mutant,
                assertions,
                submission_id,
            } => {
                b.require(*player, Role::Attacker)?;
                b.counter(*player, *mutant, assertions, submission_id.clone())?;
            }
            Command::Finish { reason } => {
                b.finish(*reason)?;
                return Ok(Proposal::Events(b.events));
            }
        }
        if b.scratch.is_active() && b.scratch.last_seq >= b.scratch.config().max_events {
            b.finish(FinishReason::EventLimit)?;
        }
        Ok(Proposal::Events(b.events))
    }

    /// Appends events produced by [`Game::propose`]. Fails without effect
    /// if any event does not apply.
    pub fn commit(&mut self, events: &[GameEvent]) -> Result<(), GameError> {
        let mut next = self.state.clone();
        for e in events {
            apply_in_place(&mut next, e)?;
        }
        self.state = next;
        self.events.extend_from_slice(events);
        Ok(())
    }

    /// `propose` then `commit`; duplicates return their original events.
    pub fn execute(&mut self, cmd: &Command, clock: &dyn Clock) -> Result<Vec<GameEvent>, GameError> {
        match self.propose(cmd, clock)? {
            Proposal::Events(events) => {
                self.commit(&events)?;
                Ok(events)
            }
            Proposal::Duplicate(range) => Ok(self.events_in(range).to_vec()),
        }
    }
}

impl Command {
    fn submission(&self) -> Option<(PlayerId, &str)> {
        match self {
            Command::SubmitMutant {
                player,
                submission_id,
                ..
            }
            | Command::SubmitTest {
                player,
                submission_id,
                ..
            }
            | Command::ClaimEquivalence {
                player,
                submission_id,
                ..
            }
            | Command::CounterClaim {
                player,
                submission_id,
                ..
            } => submission_id.as_deref().map(|s| (*player, s)),
            _ => None,
        }
    }
}

struct Batch {
    scratch: GameState,
    events: Vec<GameEvent>,
    timestamp: String,
}

fn rejection_index(r: &TestRejection) -> Option<u32> {
    match r {
        TestRejection::InvalidAssertion { index, .. }
        | TestRejection::AssertionFailsOnOriginal { index, .. }
        | TestRejection::TrapOnOriginal { index, .. } => Some(*index as u32),
        _ => None,
    }
}

impl Batch {
    fn push(&mut self, actor: Actor, payload: EventPayload) -> Result<(), GameError> {
        let event = GameEvent {
            seq: self.scratch.last_seq + 1,
            timestamp: self.timestamp.clone(),
            actor,
            payload,
        };
        apply_in_place(&mut self.scratch, &event)?;
        self.events.push(event);
        Ok(())
    }

    fn require(&self, player: PlayerId, role: Role) -> Result<(), GameError> {
        match self.scratch.player(player) {
            None => Err(GameError::ActorNotInGame(player)),
            Some(p) if p.role == role => Ok(()),
            Some(_) if role == Role::Attacker => Err(GameError::NotAttacker),
            Some(_) => Err(GameError::NotDefender),
        }
    }

    fn submit_mutant(
        &mut self,
        player: PlayerId,
        source: &str,
        submission_id: Option<String>,
    ) -> Result<(), GameError> {
        let limits = self.scratch.config().mutant_limits;
        let original = self.scratch.unit().clone();
        let validated = match validate_mutant_submission(&original, source, limits) {
            Ok(m) => m,
            Err(e) => {
                return self.push(
                    Actor::Player(player),
                    EventPayload::MutantRejected {
                        source: source.to_string(),
                        code: e.code().to_string(),
                        message: e.to_string(),
                        line: e.line(),
                        submission_id,
                    },
                )
            }
        };
        let mutant = self.scratch.next_mutant_id();
        self.push(
            Actor::Player(player),
            EventPayload::MutantAccepted {
                mutant,
                source: source.to_string(),
                edited_lines: validated.summary.edited_lines.clone(),
                edited_node_count: validated.summary.edited_node_count,
                submission_id,
            },
        )?;
        let budget = self.scratch.config().step_budget;
        let tests: Vec<(TestId, KillResult)> = self
            .scratch
            .tests
            .values()
            .map(|t| (t.id, kill_check_against_expected(&validated.unit, &t.as_valid_test(), budget)))
            .collect();
        if let Some((test, _)) = tests.iter().find(|(_, r)| r.is_killed()) {
            return self.push(Actor::System, EventPayload::MutantKilled { mutant, test: *test });
        }
        for (test, _) in tests {
            self.push(Actor::System, EventPayload::MutantSurvivedTest { mutant, test })?;
        }
        Ok(())
    }

    fn submit_test(
        &mut self,
        player: PlayerId,
        assertions: &[Assertion],
        submission_id: Option<String>,
    ) -> Result<(), GameError> {
        let config = self.scratch.config().clone();
        let original = self.scratch.unit().clone();
        let checked = if assertions.len() > config.max_assertions as usize {
            Err(TestRejection::TooManyAssertions {
                count: assertions.len(),
                limit: config.max_assertions as usize,
            })
        } else {
            validate_test(&original, assertions, config.step_budget)
        };
        let valid = match checked {
            Ok(v) => v,
            Err(e) => {
                return self.push(
                    Actor::Player(player),
                    EventPayload::TestRejected {
                        assertions: assertions.to_vec(),
                        code: e.code().to_string(),
                        message: e.to_string(),
                        assertion_index: rejection_index(&e),
                        submission_id,
                    },
                )
            }
        };
        let test = self.scratch.next_test_id();
        self.push(
            Actor::Player(player),
            EventPayload::TestAccepted {
                test,
                assertions: valid.assertions.clone(),
                covered_lines: valid.covered_lines.clone(),
                submission_id,
            },
        )?;
        let alive: Vec<(MutantId, bool, KillResult)> = self
            .scratch
            .mutants
            .values()
            .filter(|m| m.is_alive())
            .map(|m| {
                let frozen = self.scratch.open_claim(m.id).is_some();
                (m.id, frozen, kill_check_against_expected(&m.unit, &valid, config.step_budget))
            })
            .collect();
        for (mutant, frozen, result) in alive {
            if result.is_killed() {
                self.push(Actor::System, EventPayload::MutantKilled { mutant, test })?;
            } else if !frozen {
                self.push(Actor::System, EventPayload::MutantSurvivedTest { mutant, test })?;
            }
        }
        let due: Vec<MutantId> = self
            .scratch
            .claims
            .values()
            .filter(|c| {
                self.scratch.open_claim(c.mutant).is_some()
                    && c.defender_tests_since >= config.claim_window
            })
            .map(|c| c.mutant)
            .collect();
        for mutant in due {
            self.push(Actor::System, EventPayload::ClaimUpheld { mutant })?;
        }
        Ok(())
    }

    fn counter(
        &mut self,
        player: PlayerId,
        mutant: MutantId,
        assertions: &[Assertion],
        submission_id: Option<String>,
    ) -> Result<(), GameError> {
        let m = self
            .scratch
            .mutants
            .get(&mutant)
            .ok_or(GameError::UnknownMutant(mutant))?;
        if m.attacker != player {
            return Err(GameError::NotMutantOwner(mutant));
        }
        if self.scratch.open_claim(mutant).is_none() {
            return Err(GameError::NoOpenClaim(mutant));
        }
        let config = self.scratch.config();
        let verdict = if assertions.len() > config.max_assertions as usize {
            Err((
                "TOO_MANY_ASSERTIONS".to_string(),
                format!(
                    "test has {} assertions, limit is {}",
                    assertions.len(),
                    config.max_assertions
                ),
            ))
        } else {
            match validate_test(self.scratch.unit(), assertions, config.step_budget) {
                Err(e) => Err((e.code().to_string(), e.to_string())),
                Ok(valid) => match kill_check_against_expected(&m.unit, &valid, config.step_budget) {
                    KillResult::Killed(_) => Ok(()),
                    KillResult::Survived => Err((
                        "COUNTER_DOES_NOT_KILL".to_string(),
                        format!("test does not distinguish {mutant} from the original"),
                    )),
                },
            }
        };
        let payload = match verdict {
            Ok(()) => EventPayload::ClaimCountered {
                mutant,
                assertions: assertions.to_vec(),
                submission_id,
            },
            Err((code, message)) => EventPayload::CounterRejected {
                mutant,
                assertions: assertions.to_vec(),
                code,
                message,
                submission_id,
            },
        };
        self.push(Actor::Player(player), payload)
    }

    /// Finishes the game and upholds every open claim.
    fn finish(&mut self, reason: FinishReason) -> Result<(), GameError> {
        self.push(Actor::System, EventPayload::GameFinished { reason })?;
        let open: Vec<MutantId> = self
            .scratch
            .claims
            .values()
            .filter(|c| self.scratch.open_claim(c.mutant).is_some())
            .map(|c| c.mutant)
            .collect();
        for mutant in open {
            self.push(Actor::System, EventPayload::ClaimUpheld { mutant })?;
        }
        Ok(())
    }
}
