// SPDX-License-Identifier: Apache-2.0

//! NDJSON event logs: one canonical event per line.

use thiserror::Error;

use super::engine::Game;
use super::event::GameEvent;
use super::GameError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LogError {
    /// Gap, reordering, or an undecodable line where `seq` was expected.
    #[error("corrupt log at seq {seq}: {reason}")]
    CorruptLog { seq: u64, reason: String },
    #[error("event {seq} rejected during replay: {error}")]
    Rejected { seq: u64, error: GameError },
}

impl LogError {
    pub fn code(&self) -> &'static str {
        match self {
            LogError::CorruptLog { .. } => "CORRUPT_LOG",
            LogError::Rejected { .. } => "REPLAY_REJECTED",
        }
    }
}

/// Decodes every non-empty line and checks that seqs run 1, 2, 3, ...
pub fn parse_log(text: &str) -> Result<Vec<GameEvent>, LogError> {
    let mut events = Vec::new();
    for line in text.lines().filter(|l| !l.trim().is_empty()) {
        let seq = events.len() as u64 + 1;
        let event: GameEvent = serde_json::from_str(line).map_err(|e| LogError::CorruptLog {
            seq,
            reason: e.to_string(),
        })?;
        if event.seq != seq {
            return Err(LogError::CorruptLog {
                seq,
                reason: format!("found seq {} instead", event.seq),
            });
        }
        events.push(event);
    }
    Ok(events)
}

/// Result of reading a log that may end in a partially written line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LenientLog {
    pub events: Vec<GameEvent>,
    /// Set when an unterminated, undecodable final line was dropped.
    pub dropped_partial_line: Option<String>,
}

/// Like [`parse_log`], except that a final line without a terminating
/// newline that fails to decode is dropped instead of reported. Such a line
/// is what an interrupted append leaves behind.
pub fn parse_log_lenient(text: &str) -> Result<LenientLog, LogError> {
    if text.is_empty() || text.ends_with('\n') {
        return Ok(LenientLog {
            events: parse_log(text)?,
            dropped_partial_line: None,
        });
    }
    let cut = text.rfind('\n').map_or(0, |i| i + 1);
    let (head, tail) = text.split_at(cut);
    let mut events = parse_log(head)?;
    match serde_json::from_str::<GameEvent>(tail) {
        Ok(e) if e.seq == events.len() as u64 + 1 => {
            events.push(e);
            Ok(LenientLog {
                events,
                dropped_partial_line: None,
            })
        }
        _ => Ok(LenientLog {
            events,
            dropped_partial_line: Some(tail.to_string()),
        }),
    }
}

/// Strict parse followed by a fold.
pub fn replay_log(text: &str) -> Result<Game, LogError> {
    let events = parse_log(text)?;
    replay_events(events)
}

/// Folds already-parsed events, reporting the first one that does not apply.
pub fn replay_events(events: Vec<GameEvent>) -> Result<Game, LogError> {
    let mut game = Game::replay([]).expect("empty replay");
    for e in events {
        let seq = e.seq;
        game.apply_one(e)
            .map_err(|error| LogError::Rejected { seq, error })?;
    }
    Ok(game)
}
