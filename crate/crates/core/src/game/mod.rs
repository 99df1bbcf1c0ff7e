// SPDX-License-Identifier: Apache-2.0

//! Event-sourced game state: every change is a [`GameEvent`], state is a
//! fold of [`apply_event`] over the log, and commands ([`Command`]) are
//! turned into event batches by [`Game::propose`].
//!
//! Scoring: an attacker earns 1 per test a live, unclaimed mutant survives;
//! killing a mutant earns the test's author 1 plus the mutant's accrued
//! points; an upheld equivalence claim costs the attacker the mutant's
//! accrued points (never below 0) and earns the claimant 1; a successful
//! counter earns the attacker 1.

mod clock;
mod config;
mod engine;
mod event;
mod ids;
mod log;
mod scoreboard;
mod state;

use thiserror::Error;

pub use clock::{format_timestamp, Clock, LogicalClock, SystemClock};
pub use config::GameConfig;
pub use engine::{Command, Game, Proposal};
pub use event::{EventPayload, FinishReason, GameEvent};
pub use ids::{Actor, MutantId, PlayerId, Role, TestId};
pub use log::{parse_log, parse_log_lenient, replay_events, replay_log, LenientLog, LogError};
pub use scoreboard::{scoreboard, PlayerScore, Scoreboard};
pub use state::{
    apply_event, submission_key, token_digest, Claim, ClaimStatus, Coverage, GameState,
    GameStatus, MutantRecord, MutantState, PlayerRecord, SubmissionRange, TestRecord,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GameError {
    #[error("expected event seq {expected}, got {got}")]
    OutOfOrderEvent { expected: u64, got: u64 },
    #[error("{0} is not in this game")]
    ActorNotInGame(PlayerId),
    #[error("game is not active")]
    GameNotActive,
    #[error("only attackers may do this")]
    NotAttacker,
    #[error("only defenders may do this")]
    NotDefender,
    #[error("{0} does not belong to this attacker")]
    NotMutantOwner(MutantId),
    #[error("unknown mutant {0}")]
    UnknownMutant(MutantId),
    #[error("mutant {0} is not alive")]
    MutantNotAlive(MutantId),
    #[error("mutant {0} already has an open claim")]
    ClaimAlreadyOpen(MutantId),
    #[error("mutant {0} has no open claim")]
    NoOpenClaim(MutantId),
    #[error("no more {0}s may join")]
    RoleFull(Role),
    #[error("{0}")]
    InvalidName(String),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("unit under test does not compile: {0}")]
    InvalidUnit(String),
    #[error("event does not fit the game state: {0}")]
    InconsistentEvent(String),
}

impl GameError {
    pub fn code(&self) -> &'static str {
        match self {
            GameError::OutOfOrderEvent { .. } => "OUT_OF_ORDER_EVENT",
            GameError::ActorNotInGame(_) => "ACTOR_NOT_IN_GAME",
            GameError::GameNotActive => "GAME_NOT_ACTIVE",
            GameError::NotAttacker => "NOT_ATTACKER",
            GameError::NotDefender => "NOT_DEFENDER",
            GameError::NotMutantOwner(_) => "NOT_MUTANT_OWNER",
            GameError::UnknownMutant(_) => "UNKNOWN_MUTANT",
            GameError::MutantNotAlive(_) => "MUTANT_NOT_ALIVE",
            GameError::ClaimAlreadyOpen(_) => "CLAIM_ALREADY_OPEN",
            GameError::NoOpenClaim(_) => "NO_OPEN_CLAIM",
            GameError::RoleFull(_) => "ROLE_FULL",
            GameError::InvalidName(_) => "INVALID_NAME",
            GameError::InvalidConfig(_) => "INVALID_CONFIG",
            GameError::InvalidUnit(_) => "INVALID_UNIT",
            GameError::InconsistentEvent(_) => "INCONSISTENT_EVENT",
        }
    }
}
