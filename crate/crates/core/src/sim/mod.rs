// SPDX-License-Identifier: Apache-2.0

//! Seeded bot-vs-bot games. Each game's transcript is a pure function of
//! (unit, seed, game index, config); games run in parallel but the report is
//! assembled in index order so it is reproducible byte for byte.

mod bots;

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

pub use bots::{AttackerBot, DefenderBot};

use crate::game::{
    Command, EventPayload, FinishReason, Game, GameConfig, GameError, GameEvent, LogicalClock, Role,
};
use crate::lang::{compile, CompileError};
use crate::mutation::{enumerate_mutants, MutationOperator};
use crate::runner::{kill_check_against_expected, validate_test, ValidTest};

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error("cannot write game log: {0}")]
    Io(String),
}

impl SimError {
    pub fn code(&self) -> &'static str {
        match self {
            SimError::Compile(e) => e.code(),
            SimError::Game(e) => e.code(),
            SimError::Io(_) => "IO_ERROR",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    /// Template for each game; `unit_name` and `unit_source` are overwritten.
    pub game: GameConfig,
    /// Random tests the defender tries per turn.
    pub defender_attempts: u32,
    /// Let the defender claim equivalence when it finds nothing to submit.
    pub defender_claims: bool,
    /// Operators the attacker draws candidates from; also the denominator of
    /// the final mutation score.
    pub operators: Vec<MutationOperator>,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            game: GameConfig::default(),
            defender_attempts: 20,
            defender_claims: false,
            operators: vec![MutationOperator::Aor, MutationOperator::Ror],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GameSummary {
    pub game_id: String,
    pub events: u64,
    pub finish_reason: Option<FinishReason>,
    /// Enumerated candidates killed by the final suite.
    pub killed: u32,
    pub candidates: u32,
    pub attacker_points: i64,
    pub defender_points: i64,
    /// Candidates the final suite does not kill, as `line:col original -> mutated`.
    pub unkilled: Vec<String>,
}

impl GameSummary {
    pub fn score_label(&self) -> String {
        format!("{}/{}", self.killed, self.candidates)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimReport {
    pub unit_name: String,
    pub seed: u64,
    pub games_played: u32,
    pub mean_length: f64,
    pub median_length: f64,
    /// Final mutation score (`killed/candidates`) to number of games.
    pub score_distribution: BTreeMap<String, u32>,
    pub attacker_points: i64,
    pub defender_points: i64,
    pub games: Vec<GameSummary>,
    /// Wall-clock duration; kept out of the serialized report so that the
    /// report stays reproducible.
    #[serde(skip)]
    pub wall_clock_ms: u128,
}

impl SimReport {
    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string(self).expect("reports always serialize")
    }

    /// Games whose final suite kills at least `killed` candidates.
    pub fn games_reaching(&self, killed: u32) -> usize {
        self.games.iter().filter(|g| g.killed >= killed).count()
    }
}

/// A finished simulated game.
pub struct SimGame {
    pub game: Game,
    pub summary: GameSummary,
}

pub fn game_id(seed: u64, index: u32) -> String {
    format!("sim-{seed}-{index}")
}

/// Plays game `index` of a run seeded with `seed`.
pub fn run_game(
    unit_name: &str,
    source: &str,
    seed: u64,
    index: u32,
    config: &SimConfig,
) -> Result<SimGame, SimError> {
    let original = compile(source)?;
    let candidates = enumerate_mutants(&original, &config.operators);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let clock = LogicalClock::default();
    let game_config = GameConfig {
        unit_name: unit_name.to_string(),
        unit_source: source.to_string(),
        ..config.game.clone()
    };
    let mut game = Game::create(&game_id(seed, index), game_config, None, &clock)?;
    let join = |game: &mut Game, name: &str, role: Role, team: &str| -> Result<_, SimError> {
        let events = game.execute(
            &Command::Join {
                name: name.into(),
                role,
                team: team.into(),
                token_digest: None,
            },
            &clock,
        )?;
        match events.first().map(|e| &e.payload) {
            Some(EventPayload::PlayerJoined { player, .. }) => Ok(*player),
            _ => Err(SimError::Game(GameError::InconsistentEvent("join produced no player".into()))),
        }
    };
    let attacker_id = join(&mut game, "attacker", Role::Attacker, "red")?;
    let defender_id = join(&mut game, "defender", Role::Defender, "blue")?;
    let mut attacker = AttackerBot::new(attacker_id, candidates.clone());
    let defender = DefenderBot {
        player: defender_id,
        attempts: config.defender_attempts,
        claims: config.defender_claims,
    };

    let mut passes = 0;
    let mut attackers_turn = true;
    while game.state().is_active() {
        let cmd = if attackers_turn {
            attacker.next_move(game.state(), &mut rng)
        } else {
            defender.next_move(game.state(), &mut rng)
        };
        attackers_turn = !attackers_turn;
        match cmd {
            Some(cmd) => {
                passes = 0;
                game.execute(&cmd, &clock)?;
            }
            None => {
                passes += 1;
                if passes >= 2 {
                    game.execute(
                        &Command::Finish {
                            reason: FinishReason::NoMoves,
                        },
                        &clock,
                    )?;
                }
            }
        }
    }

    let summary = summarize(&game, &original, &candidates)?;
    Ok(SimGame { game, summary })
}

fn summarize(
    game: &Game,
    original: &crate::lang::TypedUnit,
    candidates: &[crate::mutation::MutantCandidate],
) -> Result<GameSummary, SimError> {
    let state = game.state();
    let budget = state.config().step_budget;
    let mut suite: Vec<ValidTest> = state.tests.values().map(|t| t.as_valid_test()).collect();
    for e in game.events() {
        if let EventPayload::ClaimCountered { assertions, .. } = &e.payload {
            if let Ok(t) = validate_test(original, assertions, budget) {
                suite.push(t);
            }
        }
    }
    let mut killed = 0;
    let mut unkilled = Vec::new();
    for c in candidates {
        let mutant = compile(&c.mutated_source)?;
        if suite
            .iter()
            .any(|t| kill_check_against_expected(&mutant, t, budget).is_killed())
        {
            killed += 1;
        } else {
            unkilled.push(format!(
                "{} {} -> {}",
                c.site, c.original_fragment, c.mutated_fragment
            ));
        }
    }
    let board = crate::game::scoreboard(state);
    Ok(GameSummary {
        game_id: state.game_id.clone(),
        events: state.last_seq,
        finish_reason: state.finish_reason,
        killed,
        candidates: candidates.len() as u32,
        attacker_points: board.role_total(Role::Attacker),
        defender_points: board.role_total(Role::Defender),
        unkilled,
    })
}

/// Runs `n_games` seeded games. When `data_dir` is given each game's event
/// log is written to `<data_dir>/games/<game id>.ndjson`.
pub fn run_simulation(
    unit_name: &str,
    source: &str,
    n_games: u32,
    seed: u64,
    config: &SimConfig,
    data_dir: Option<&Path>,
) -> Result<(SimReport, Vec<Game>), SimError> {
    let started = std::time::Instant::now();
    compile(source)?;
    let played: Vec<SimGame> = (0..n_games)
        .into_par_iter()
        .map(|i| run_game(unit_name, source, seed, i, config))
        .collect::<Result<_, _>>()?;
    if let Some(dir) = data_dir {
        let games_dir = dir.join("games");
        fs::create_dir_all(&games_dir).map_err(|e| SimError::Io(format!("{}: {e}", games_dir.display())))?;
        for g in &played {
            let path = games_dir.join(format!("{}.ndjson", g.summary.game_id));
            fs::write(&path, log_text(g.game.events()))
                .map_err(|e| SimError::Io(format!("{}: {e}", path.display())))?;
        }
    }
    let summaries: Vec<GameSummary> = played.iter().map(|g| g.summary.clone()).collect();
    let mut report = aggregate(unit_name, seed, summaries);
    report.wall_clock_ms = started.elapsed().as_millis();
    Ok((report, played.into_iter().map(|g| g.game).collect()))
}

/// One canonical JSON event per line.
pub fn log_text(events: &[GameEvent]) -> String {
    let mut out = String::new();
    for e in events {
        out.push_str(&e.to_canonical_json());
        out.push('\n');
    }
    out
}

fn aggregate(unit_name: &str, seed: u64, games: Vec<GameSummary>) -> SimReport {
    let n = games.len();
    let mut lengths: Vec<u64> = games.iter().map(|g| g.events).collect();
    lengths.sort_unstable();
    let mean_length = if n == 0 {
        0.0
    } else {
        lengths.iter().sum::<u64>() as f64 / n as f64
    };
    let median_length = match n {
        0 => 0.0,
        _ if n % 2 == 1 => lengths[n / 2] as f64,
        _ => (lengths[n / 2 - 1] + lengths[n / 2]) as f64 / 2.0,
    };
    let mut score_distribution = BTreeMap::new();
    for g in &games {
        *score_distribution.entry(g.score_label()).or_insert(0) += 1;
    }
    SimReport {
        unit_name: unit_name.to_string(),
        seed,
        games_played: n as u32,
        mean_length,
        median_length,
        score_distribution,
        attacker_points: games.iter().map(|g| g.attacker_points).sum(),
        defender_points: games.iter().map(|g| g.defender_points).sum(),
        games,
        wall_clock_ms: 0,
    }
}
