// SPDX-License-Identifier: Apache-2.0

//! Engine for a mutation-testing duel: attackers seed bugs into a small
//! program by editing its source, defenders write tests to catch them.

pub mod lang;
pub mod mutation;
pub mod runner;
pub mod game;
pub mod analytics;
pub mod sim;
pub mod server;

/// The canonical two-branch example unit.
pub const ABS_DIFF_SOURCE: &str = include_str!("../fixtures/abs_diff.cut");
