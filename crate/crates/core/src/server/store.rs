// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use rand::RngCore;
use thiserror::Error;
use tracing::{error, warn};

use crate::analytics::Tracker;
use crate::game::{
    parse_log_lenient, replay_events, token_digest, Clock, Command, Game, GameConfig, GameError,
    GameEvent, LogError, Proposal,
};

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("no game `{0}`")]
    GameNotFound(String),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error("storage failure: {0}")]
    StorageFailure(String),
    #[error("game is read-only after a storage failure: {0}")]
    ReadOnly(String),
    #[error("cannot recover `{game}`: {error}")]
    Recovery { game: String, error: LogError },
}

impl StoreError {
    pub fn code(&self) -> &'static str {
        match self {
            StoreError::GameNotFound(_) => "GAME_NOT_FOUND",
            StoreError::Game(e) => e.code(),
            StoreError::StorageFailure(_) | StoreError::ReadOnly(_) => "STORAGE_FAILURE",
            StoreError::Recovery { error, .. } => error.code(),
        }
    }
}

/// 128 random bits, hex encoded.
pub fn new_token() -> String {
    let mut bytes = [0u8; 16];
    rand::rng().fill_bytes(&mut bytes);
    hex::encode(bytes)
}

pub fn valid_game_id(id: &str) -> bool {
    !id.is_empty()
        && id.len() <= 64
        && id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
}

struct Writer {
    game: Game,
    failure: Option<String>,
}

struct Slot {
    path: PathBuf,
    /// Serializes every mutation of this game.
    writer: Mutex<Writer>,
    /// What readers see; replaced only after the log is synced.
    snapshot: RwLock<Arc<Game>>,
}

/// All games of a server, each backed by `<data dir>/games/<id>.ndjson`.
pub struct GameStore {
    games_dir: PathBuf,
    games: RwLock<BTreeMap<String, Arc<Slot>>>,
    tracker: Tracker,
    clock: Arc<dyn Clock>,
}

impl GameStore {
    /// Opens the data directory and replays every stored game. A game whose
    /// last line is incomplete is recovered from its complete lines and the
    /// file is cut back to them. Games that fail to replay are skipped.
    pub fn open(data_dir: &Path, tracker: Tracker, clock: Arc<dyn Clock>) -> Result<Self, StoreError> {
        let games_dir = data_dir.join("games");
        fs::create_dir_all(&games_dir).map_err(|e| storage(&games_dir, e))?;
        let mut games = BTreeMap::new();
        let mut entries: Vec<PathBuf> = fs::read_dir(&games_dir)
            .map_err(|e| storage(&games_dir, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "ndjson"))
            .collect();
        entries.sort();
        for path in entries {
            let Some(id) = path.file_stem().and_then(|s| s.to_str()).map(str::to_string) else {
                continue;
            };
            if !valid_game_id(&id) {
                continue;
            }
            match recover(&path) {
                Ok(game) => {
                    games.insert(id, Arc::new(Slot::new(path, game)));
                }
                Err(e) => error!(game = %id, error = %e, "skipping game that does not replay"),
            }
        }
        Ok(GameStore {
            games_dir,
            games: RwLock::new(games),
            tracker,
            clock,
        })
    }

    pub fn tracker(&self) -> &Tracker {
        &self.tracker
    }

    pub fn game_ids(&self) -> Vec<String> {
        self.games.read().expect("games lock").keys().cloned().collect()
    }

    /// Creates a game and returns its id and the creator's token.
    pub fn create(&self, config: GameConfig) -> Result<(String, String), StoreError> {
        let token = new_token();
        let mut games = self.games.write().expect("games lock");
        let id = loop {
            let candidate = format!("g{}", &new_token()[..12]);
            if !games.contains_key(&candidate) {
                break candidate;
            }
        };
        let event = Game::creation_event(&id, config, Some(token_digest(&token)), self.clock.as_ref())?;
        let game = Game::replay([event.clone()])?;
        let path = self.games_dir.join(format!("{id}.ndjson"));
        append_synced(&path, std::slice::from_ref(&event)).map_err(StoreError::StorageFailure)?;
        if let Ok(dir) = File::open(&self.games_dir) {
            let _ = dir.sync_all();
        }
        self.track(&Game::replay([]).expect("empty"), &[event]);
        games.insert(id.clone(), Arc::new(Slot::new(path, game)));
        Ok((id, token))
    }

    fn slot(&self, id: &str) -> Result<Arc<Slot>, StoreError> {
        self.games
            .read()
            .expect("games lock")
            .get(id)
            .cloned()
            .ok_or_else(|| StoreError::GameNotFound(id.to_string()))
    }

    /// The latest committed game. Never waits for a writer.
    pub fn snapshot(&self, id: &str) -> Result<Arc<Game>, StoreError> {
        Ok(self.slot(id)?.snapshot.read().expect("snapshot lock").clone())
    }

    /// Runs `cmd` against game `id`. New events are appended and synced to
    /// the log before they become visible; a duplicate submission returns
    /// the events it produced the first time.
    pub fn execute(&self, id: &str, cmd: &Command) -> Result<Vec<GameEvent>, StoreError> {
        let slot = self.slot(id)?;
        let mut w = slot.writer.lock().expect("writer lock");
        let events = match w.game.propose(cmd, self.clock.as_ref())? {
            Proposal::Duplicate(range) => return Ok(w.game.events_in(range).to_vec()),
            Proposal::Events(events) => events,
        };
        if let Some(f) = &w.failure {
            return Err(StoreError::ReadOnly(f.clone()));
        }
        if let Err(e) = append_synced(&slot.path, &events) {
            error!(game = %id, error = %e, "log append failed; game is now read-only");
            w.failure = Some(e.clone());
            return Err(StoreError::StorageFailure(e));
        }
        let before = slot.snapshot.read().expect("snapshot lock").clone();
        w.game.commit(&events)?;
        *slot.snapshot.write().expect("snapshot lock") = Arc::new(w.game.clone());
        drop(w);
        self.track(&before, &events);
        Ok(events)
    }

    fn track(&self, before: &Game, events: &[GameEvent]) {
        if let Err(e) = self.tracker.track_events(before.state(), events) {
            warn!(error = %e, "analytics tracking failed");
        }
    }
}

impl Slot {
    fn new(path: PathBuf, game: Game) -> Self {
        Slot {
            path,
            snapshot: RwLock::new(Arc::new(game.clone())),
            writer: Mutex::new(Writer { game, failure: None }),
        }
    }
}

fn storage(path: &Path, e: std::io::Error) -> StoreError {
    StoreError::StorageFailure(format!("{}: {e}", path.display()))
}

fn recover(path: &Path) -> Result<Game, StoreError> {
    let game = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string();
    let text = fs::read_to_string(path).map_err(|e| storage(path, e))?;
    let log = parse_log_lenient(&text).map_err(|error| StoreError::Recovery {
        game: game.clone(),
        error,
    })?;
    if let Some(partial) = &log.dropped_partial_line {
        warn!(
            game = %game,
            bytes = partial.len(),
            "dropping incomplete final log line"
        );
        let keep = text.len() - partial.len();
        let f = OpenOptions::new().write(true).open(path).map_err(|e| storage(path, e))?;
        f.set_len(keep as u64).map_err(|e| storage(path, e))?;
        f.sync_all().map_err(|e| storage(path, e))?;
    }
    replay_events(log.events).map_err(|error| StoreError::Recovery { game, error })
}

/// Appends one line per event and syncs. The file is reopened each time so
/// that a replaced or vanished file surfaces as an error here.
fn append_synced(path: &Path, events: &[GameEvent]) -> Result<(), String> {
    let mut buf = String::new();
    for e in events {
        buf.push_str(&e.to_canonical_json());
        buf.push('\n');
    }
    let io = |e: std::io::Error| format!("{}: {e}", path.display());
    let mut f = OpenOptions::new().create(true).append(true).open(path).map_err(io)?;
    f.write_all(buf.as_bytes()).map_err(io)?;
    f.sync_data().map_err(io)
}
