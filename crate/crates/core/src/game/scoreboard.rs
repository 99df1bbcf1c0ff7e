// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;

use serde::Serialize;

use super::ids::{MutantId, PlayerId, Role, TestId};
use super::state::GameState;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PlayerScore {
    pub player: PlayerId,
    pub name: String,
    pub role: Role,
    pub team: String,
    pub points: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct Scoreboard {
    pub players: Vec<PlayerScore>,
    pub teams: BTreeMap<String, i64>,
    pub mutants: BTreeMap<MutantId, i64>,
    pub tests: BTreeMap<TestId, i64>,
}

impl Scoreboard {
    /// Points keyed by display name.
    pub fn by_name(&self) -> BTreeMap<String, i64> {
        self.players
            .iter()
            .map(|p| (p.name.clone(), p.points))
            .collect()
    }

    pub fn role_total(&self, role: Role) -> i64 {
        self.players
            .iter()
            .filter(|p| p.role == role)
            .map(|p| p.points)
            .sum()
    }
}

pub fn scoreboard(state: &GameState) -> Scoreboard {
    let mut board = Scoreboard::default();
    for p in state.players.values() {
        board.players.push(PlayerScore {
            player: p.id,
            name: p.name.clone(),
            role: p.role,
            team: p.team.clone(),
            points: p.points,
        });
        *board.teams.entry(p.team.clone()).or_insert(0) += p.points;
    }
    board.mutants = state.mutants.values().map(|m| (m.id, m.points)).collect();
    board.tests = state.tests.values().map(|t| (t.id, t.points)).collect();
    board
}
