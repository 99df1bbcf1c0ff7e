// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value as Json};
use sha2::{Digest, Sha256};

use crate::game::{Actor, EventPayload, GameEvent, GameState, MutantId, PlayerId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verb {
    Started,
    Joined,
    SubmittedMutant,
    SubmittedTest,
    KilledMutant,
    MutantSurvived,
    ClaimedEquivalence,
    CounteredClaim,
    ClaimUpheld,
    Finished,
}

impl Verb {
    pub const ALL: [Verb; 10] = [
        Verb::Started,
        Verb::Joined,
        Verb::SubmittedMutant,
        Verb::SubmittedTest,
        Verb::KilledMutant,
        Verb::MutantSurvived,
        Verb::ClaimedEquivalence,
        Verb::CounteredClaim,
        Verb::ClaimUpheld,
        Verb::Finished,
    ];
}

impl fmt::Display for Verb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).expect("unit variant");
        f.write_str(s.as_str().expect("string"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatementActor {
    pub id: String,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatementObject {
    pub game_id: String,
    pub kind: String,
    pub id: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatementResult {
    pub score_delta: i64,
    pub success: bool,
}

/// An actor/verb/object interaction record, one per game event.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticsStatement {
    pub actor: StatementActor,
    pub verb: Verb,
    pub object: StatementObject,
    pub result: Option<StatementResult>,
    pub timestamp: String,
    pub extensions: BTreeMap<String, Json>,
}

impl AnalyticsStatement {
    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string(self).expect("statements always serialize")
    }

    pub fn seq(&self) -> Option<u64> {
        self.extensions.get("seq").and_then(Json::as_u64)
    }
}

fn sha256_hex(s: &str) -> String {
    hex::encode(Sha256::digest(s.as_bytes()))
}

fn player_actor(state: &GameState, p: PlayerId) -> StatementActor {
    StatementActor {
        id: p.to_string(),
        name: state.player(p).map(|r| r.name.clone()).unwrap_or_default(),
    }
}

/// Maps an event to its statement, given the state just before the event
/// was applied. Every current event kind maps to a statement; `None` is
/// reserved for bookkeeping events.
pub fn to_statement(event: &GameEvent, before: &GameState) -> Option<AnalyticsStatement> {
    let game_id = match &event.payload {
        EventPayload::GameCreated { game_id, .. } => game_id.clone(),
        _ => before.game_id.clone(),
    };
    let object = |kind: &str, id: String| StatementObject {
        game_id: game_id.clone(),
        kind: kind.to_string(),
        id,
    };
    let result = |score_delta: i64, success: bool| Some(StatementResult { score_delta, success });
    let mut ext: BTreeMap<String, Json> = BTreeMap::new();
    ext.insert("seq".into(), json!(event.seq));
    ext.insert("event".into(), json!(event.payload.kind()));
    let mut actor = match event.actor {
        Actor::System => StatementActor {
            id: "system".into(),
            name: "system".into(),
        },
        Actor::Player(p) => player_actor(before, p),
    };
    let attacker_of = |m: MutantId| before.mutants.get(&m).map(|r| r.attacker);

    let (verb, object, result) = match &event.payload {
        EventPayload::GameCreated { config, .. } => {
            ext.insert("unit_name".into(), json!(config.unit_name));
            ext.insert("unit_sha256".into(), json!(sha256_hex(&config.unit_source)));
            (Verb::Started, object("game", game_id.clone()), None)
        }
        EventPayload::PlayerJoined {
            player,
            name,
            role,
            team,
            ..
        } => {
            actor = StatementActor {
                id: player.to_string(),
                name: name.clone(),
            };
            ext.insert("role".into(), json!(role));
            ext.insert("team".into(), json!(team));
            (Verb::Joined, object("game", game_id.clone()), None)
        }
        EventPayload::MutantAccepted {
            mutant,
            source,
            edited_lines,
            edited_node_count,
            ..
        } => {
            ext.insert("source_sha256".into(), json!(sha256_hex(source)));
            ext.insert("edited_lines".into(), json!(edited_lines));
            ext.insert("edited_node_count".into(), json!(edited_node_count));
            (Verb::SubmittedMutant, object("mutant", mutant.to_string()), result(0, true))
        }
        EventPayload::MutantRejected { source, code, line, .. } => {
            ext.insert("source_sha256".into(), json!(sha256_hex(source)));
            ext.insert("error_code".into(), json!(code));
            ext.insert("error_line".into(), json!(line));
            (Verb::SubmittedMutant, object("mutant", String::new()), result(0, false))
        }
        EventPayload::TestAccepted {
            test,
            assertions,
            covered_lines,
            ..
        } => {
            ext.insert("assertion_count".into(), json!(assertions.len()));
            ext.insert("covered_lines".into(), json!(covered_lines));
            (Verb::SubmittedTest, object("test", test.to_string()), result(0, true))
        }
        EventPayload::TestRejected {
            assertions,
            code,
            assertion_index,
            ..
        } => {
            ext.insert("assertion_count".into(), json!(assertions.len()));
            ext.insert("error_code".into(), json!(code));
            ext.insert("assertion_index".into(), json!(assertion_index));
            (Verb::SubmittedTest, object("test", String::new()), result(0, false))
        }
        EventPayload::MutantKilled { mutant, test } => {
            let accrued = before.mutants.get(mutant).map_or(0, |m| m.accrued_points);
            if let Some(t) = before.tests.get(test) {
                actor = player_actor(before, t.author);
            }
            ext.insert("test".into(), json!(test));
            ext.insert("accrued_points".into(), json!(accrued));
            (
                Verb::KilledMutant,
                object("mutant", mutant.to_string()),
                result(1 + accrued as i64, true),
            )
        }
        EventPayload::MutantSurvivedTest { mutant, test } => {
            if let Some(a) = attacker_of(*mutant) {
                actor = player_actor(before, a);
            }
            let accrued = before.mutants.get(mutant).map_or(0, |m| m.accrued_points);
            ext.insert("test".into(), json!(test));
            ext.insert("accrued_points".into(), json!(accrued + 1));
            (Verb::MutantSurvived, object("mutant", mutant.to_string()), result(1, true))
        }
        EventPayload::EquivalenceClaimed { mutant, .. } => {
            (Verb::ClaimedEquivalence, object("mutant", mutant.to_string()), None)
        }
        EventPayload::ClaimCountered { mutant, assertions, .. } => {
            ext.insert("assertion_count".into(), json!(assertions.len()));
            (Verb::CounteredClaim, object("mutant", mutant.to_string()), result(1, true))
        }
        EventPayload::CounterRejected {
            mutant,
            assertions,
            code,
            ..
        } => {
            ext.insert("assertion_count".into(), json!(assertions.len()));
            ext.insert("error_code".into(), json!(code));
            (Verb::CounteredClaim, object("mutant", mutant.to_string()), result(0, false))
        }
        EventPayload::ClaimUpheld { mutant } => {
            let claim = before.claims.get(mutant);
            if let Some(c) = claim {
                actor = player_actor(before, c.claimant);
            }
            if let Some(m) = before.mutants.get(mutant) {
                let current = before.player(m.attacker).map_or(0, |p| p.points);
                let deducted = (m.accrued_points as i64).min(current.max(0));
                ext.insert("attacker".into(), json!(m.attacker));
                ext.insert("attacker_score_delta".into(), json!(-deducted));
            }
            (Verb::ClaimUpheld, object("mutant", mutant.to_string()), result(1, true))
        }
        EventPayload::GameFinished { reason } => {
            ext.insert("reason".into(), json!(reason));
            (Verb::Finished, object("game", game_id.clone()), None)
        }
    };
    Some(AnalyticsStatement {
        actor,
        verb,
        object,
        result,
        timestamp: event.timestamp.clone(),
        extensions: ext,
    })
}

/// Statements for a whole log, folding state as it goes.
pub fn statements_for_log(events: &[GameEvent]) -> Vec<AnalyticsStatement> {
    let mut state = GameState::empty();
    let mut out = Vec::new();
    for e in events {
        if let Some(s) = to_statement(e, &state) {
            out.push(s);
        }
        match crate::game::apply_event(&state, e) {
            Ok(next) => state = next,
            Err(_) => break,
        }
    }
    out
}
