// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::config::GameConfig;
use super::ids::{Actor, MutantId, PlayerId, Role, TestId};
use crate::runner::Assertion;

/// One entry of a game's append-only log. Serialized compactly with fields
/// in declaration order; that string is the canonical form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameEvent {
    pub seq: u64,
    pub timestamp: String,
    pub actor: Actor,
    pub payload: EventPayload,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FinishReason {
    /// The creator ended the game.
    Requested,
    /// The configured event bound was reached.
    EventLimit,
    /// Neither side could move (simulations).
    NoMoves,
}

/// Event payloads. Accepted and rejected submissions record the submitted
/// content, so a log is a complete transcript and replay never re-runs
/// validation or kill checks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum EventPayload {
    GameCreated {
        game_id: String,
        config: GameConfig,
        creator_token_digest: Option<String>,
    },
    PlayerJoined {
        player: PlayerId,
        name: String,
        role: Role,
        team: String,
        token_digest: Option<String>,
    },
    MutantAccepted {
        mutant: MutantId,
        source: String,
        edited_lines: BTreeSet<u32>,
        edited_node_count: u32,
        submission_id: Option<String>,
    },
    MutantRejected {
        source: String,
        code: String,
        message: String,
        line: Option<u32>,
        submission_id: Option<String>,
    },
    TestAccepted {
        test: TestId,
        assertions: Vec<Assertion>,
        covered_lines: BTreeSet<u32>,
        submission_id: Option<String>,
    },
    TestRejected {
        assertions: Vec<Assertion>,
        code: String,
        message: String,
        assertion_index: Option<u32>,
        submission_id: Option<String>,
    },
    MutantKilled {
        mutant: MutantId,
        test: TestId,
    },
    MutantSurvivedTest {
        mutant: MutantId,
        test: TestId,
    },
    EquivalenceClaimed {
        mutant: MutantId,
        submission_id: Option<String>,
    },
    ClaimCountered {
        mutant: MutantId,
        assertions: Vec<Assertion>,
        submission_id: Option<String>,
    },
    CounterRejected {
        mutant: MutantId,
        assertions: Vec<Assertion>,
        code: String,
        message: String,
        submission_id: Option<String>,
    },
    ClaimUpheld {
        mutant: MutantId,
    },
    GameFinished {
        reason: FinishReason,
    },
}

impl EventPayload {
    pub fn kind(&self) -> &'static str {
        match self {
            EventPayload::GameCreated { .. } => "GameCreated",
            EventPayload::PlayerJoined { .. } => "PlayerJoined",
            EventPayload::MutantAccepted { .. } => "MutantAccepted",
            EventPayload::MutantRejected { .. } => "MutantRejected",
            EventPayload::TestAccepted { .. } => "TestAccepted",
            EventPayload::TestRejected { .. } => "TestRejected",
            EventPayload::MutantKilled { .. } => "MutantKilled",
            EventPayload::MutantSurvivedTest { .. } => "MutantSurvivedTest",
            EventPayload::EquivalenceClaimed { .. } => "EquivalenceClaimed",
            EventPayload::ClaimCountered { .. } => "ClaimCountered",
            EventPayload::CounterRejected { .. } => "CounterRejected",
            EventPayload::ClaimUpheld { .. } => "ClaimUpheld",
            EventPayload::GameFinished { .. } => "GameFinished",
        }
    }

    pub fn submission_id(&self) -> Option<&str> {
        match self {
            EventPayload::MutantAccepted { submission_id, .. }
            | EventPayload::MutantRejected { submission_id, .. }
            | EventPayload::TestAccepted { submission_id, .. }
            | EventPayload::TestRejected { submission_id, .. }
            | EventPayload::EquivalenceClaimed { submission_id, .. }
            | EventPayload::ClaimCountered { submission_id, .. }
            | EventPayload::CounterRejected { submission_id, .. } => submission_id.as_deref(),
            _ => None,
        }
    }

    /// Events emitted as a side effect of the command that precedes them,
    /// rather than starting a command of their own.
    pub fn is_consequence(&self) -> bool {
        matches!(
            self,
            EventPayload::MutantKilled { .. }
                | EventPayload::MutantSurvivedTest { .. }
                | EventPayload::ClaimUpheld { .. }
                | EventPayload::GameFinished {
                    reason: FinishReason::EventLimit
                }
        )
    }
}

impl GameEvent {
    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string(self).expect("events always serialize")
    }
}
