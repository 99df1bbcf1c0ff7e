// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use crate::lang::DEFAULT_STEP_BUDGET;
use crate::mutation::MutantLimits;
use crate::runner::MAX_ASSERTIONS;

use super::GameError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GameConfig {
    /// Name given to the unit under test.
    pub unit_name: String,
    pub unit_source: String,
    pub max_players_per_role: u32,
    pub mutant_limits: MutantLimits,
    pub max_assertions: u32,
    pub step_budget: u64,
    /// Accepted defender tests after which an unanswered claim is upheld.
    pub claim_window: u32,
    /// The game finishes once its log reaches this many events.
    pub max_events: u64,
}

impl Default for GameConfig {
    fn default() -> Self {
        GameConfig {
            unit_name: "unit".into(),
            unit_source: String::new(),
            max_players_per_role: 8,
            mutant_limits: MutantLimits::default(),
            max_assertions: MAX_ASSERTIONS as u32,
            step_budget: DEFAULT_STEP_BUDGET,
            claim_window: 5,
            max_events: 2_000,
        }
    }
}

impl GameConfig {
    pub fn for_source(unit_name: impl Into<String>, source: impl Into<String>) -> Self {
        GameConfig {
            unit_name: unit_name.into(),
            unit_source: source.into(),
            ..GameConfig::default()
        }
    }

    pub fn validate(&self) -> Result<(), GameError> {
        let bad = |what: &str| Err(GameError::InvalidConfig(format!("{what} must be positive")));
        if self.max_players_per_role == 0 {
            return bad("max_players_per_role");
        }
        if self.mutant_limits.max_edited_nodes == 0 {
            return bad("mutant_limits.max_edited_nodes");
        }
        if self.max_assertions == 0 {
            return bad("max_assertions");
        }
        if self.max_assertions as usize > MAX_ASSERTIONS {
            return Err(GameError::InvalidConfig(format!(
                "max_assertions must be at most {MAX_ASSERTIONS}"
            )));
        }
        if self.step_budget == 0 {
            return bad("step_budget");
        }
        if self.claim_window == 0 {
            return bad("claim_window");
        }
        if self.max_events == 0 {
            return bad("max_events");
        }
        if self.unit_name.trim().is_empty() {
            return Err(GameError::InvalidConfig("unit_name must not be empty".into()));
        }
        Ok(())
    }
}
