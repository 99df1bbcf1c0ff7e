// SPDX-License-Identifier: Apache-2.0

//! Interaction statements derived from game events, written to a local
//! NDJSON log and delivered at least once to an optional HTTP collector.
//! The tracker sits outside the engine: it only reads events after they are
//! committed, so its failures cannot change game state.

mod statement;
mod tracker;

pub use statement::{
    statements_for_log, to_statement, AnalyticsStatement, StatementActor, StatementObject,
    StatementResult, Verb,
};
pub use tracker::{
    Backoff, DeliveryState, HttpSink, RemoteSink, Tracker, TrackerConfig, TrackerError, MAX_BATCH,
};
