// SPDX-License-Identifier: Apache-2.0

use std::collections::VecDeque;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;
use std::time::{Duration, Instant};

use serde::Serialize;
use thiserror::Error;

use super::statement::{to_statement, AnalyticsStatement};
use crate::game::{GameEvent, GameState};

pub const MAX_BATCH: usize = 100;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TrackerError {
    #[error("remote sink unavailable: {0}")]
    SinkUnavailable(String),
    #[error("cannot write local statement log: {0}")]
    LocalLogWriteFailure(String),
}

impl TrackerError {
    pub fn code(&self) -> &'static str {
        match self {
            TrackerError::SinkUnavailable(_) => "SINK_UNAVAILABLE",
            TrackerError::LocalLogWriteFailure(_) => "LOCAL_LOG_WRITE_FAILURE",
        }
    }
}

/// Destination for statement batches.
pub trait RemoteSink: Send + Sync {
    fn send(&self, batch: &[AnalyticsStatement]) -> Result<(), TrackerError>;
}

/// POSTs batches as a JSON array to `<base>/statements`; any 2xx is an
/// acknowledgment.
pub struct HttpSink {
    url: String,
    agent: ureq::Agent,
}

impl HttpSink {
    pub fn new(base_url: &str) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(10)))
            .build()
            .into();
        HttpSink {
            url: format!("{}/statements", base_url.trim_end_matches('/')),
            agent,
        }
    }
}

impl RemoteSink for HttpSink {
    fn send(&self, batch: &[AnalyticsStatement]) -> Result<(), TrackerError> {
        let body = serde_json::to_string(batch).expect("statements serialize");
        self.agent
            .post(&self.url)
            .header("content-type", "application/json")
            .send(body)
            .map(|_| ())
            .map_err(|e| TrackerError::SinkUnavailable(e.to_string()))
    }
}

/// Exponential retry delay: base 1 s, doubling, capped at 60 s.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Backoff {
    pub base: Duration,
    pub factor: u32,
    pub cap: Duration,
}

impl Default for Backoff {
    fn default() -> Self {
        Backoff {
            base: Duration::from_secs(1),
            factor: 2,
            cap: Duration::from_secs(60),
        }
    }
}

impl Backoff {
    /// Delay before the retry that follows `failures` consecutive failures.
    pub fn delay(&self, failures: u32) -> Duration {
        if failures == 0 {
            return Duration::ZERO;
        }
        let mut d = self.base;
        for _ in 1..failures {
            d = d.saturating_mul(self.factor);
            if d >= self.cap {
                return self.cap;
            }
        }
        d.min(self.cap)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct DeliveryState {
    pub pending: usize,
    pub delivered: u64,
    pub failed: u64,
    pub consecutive_failures: u32,
    pub last_error: Option<String>,
    pub local_written: u64,
    pub local_failed: bool,
}

#[derive(Default)]
pub struct TrackerConfig {
    /// Directory for `<game id>.ndjson` statement logs.
    pub log_dir: Option<PathBuf>,
    pub remote: Option<Box<dyn RemoteSink>>,
    pub backoff: Backoff,
}

struct Delivery {
    state: DeliveryState,
    next_attempt: Option<Instant>,
}

struct Inner {
    log_dir: Option<PathBuf>,
    remote: Option<Box<dyn RemoteSink>>,
    backoff: Backoff,
    queue: Mutex<VecDeque<AnalyticsStatement>>,
    delivery: Mutex<Delivery>,
    flushing: Mutex<()>,
    enabled: bool,
    stop: AtomicBool,
}

/// Converts events into statements, appends them to the local log and
/// queues them for the remote sink. Cheap to clone; clones share the queue.
#[derive(Clone)]
pub struct Tracker {
    inner: Arc<Inner>,
}

impl Tracker {
    pub fn new(config: TrackerConfig) -> Self {
        Self::build(config, true)
    }

    /// A tracker that drops everything.
    pub fn disabled() -> Self {
        Self::build(TrackerConfig::default(), false)
    }

    fn build(config: TrackerConfig, enabled: bool) -> Self {
        Tracker {
            inner: Arc::new(Inner {
                log_dir: config.log_dir,
                remote: config.remote,
                backoff: config.backoff,
                queue: Mutex::new(VecDeque::new()),
                delivery: Mutex::new(Delivery {
                    state: DeliveryState::default(),
                    next_attempt: None,
                }),
                flushing: Mutex::new(()),
                enabled,
                stop: AtomicBool::new(false),
            }),
        }
    }

    pub fn is_enabled(&self) -> bool {
        self.inner.enabled
    }

    pub fn log_path(&self, game_id: &str) -> Option<PathBuf> {
        self.inner
            .log_dir
            .as_ref()
            .map(|d| d.join(format!("{game_id}.ndjson")))
    }

    /// Records `events`, which were just applied on top of `before`.
    pub fn track_events(&self, before: &GameState, events: &[GameEvent]) -> Result<(), TrackerError> {
        if !self.inner.enabled {
            return Ok(());
        }
        let mut state = before.clone();
        for e in events {
            if let Some(s) = to_statement(e, &state) {
                self.emit(s)?;
            }
            if let Ok(next) = crate::game::apply_event(&state, e) {
                state = next;
            }
        }
        Ok(())
    }

    /// Appends to the local log, then queues for the remote sink.
    pub fn emit(&self, statement: AnalyticsStatement) -> Result<(), TrackerError> {
        if !self.inner.enabled {
            return Ok(());
        }
        {
            let mut d = self.inner.delivery.lock().expect("delivery lock");
            if d.state.local_failed {
                return Err(TrackerError::LocalLogWriteFailure(
                    "tracker stopped after an earlier local write failure".into(),
                ));
            }
            if let Some(path) = self.log_path(&statement.object.game_id) {
                if let Err(e) = append_line(&path, &statement.to_canonical_json()) {
                    d.state.local_failed = true;
                    d.state.last_error = Some(e.clone());
                    return Err(TrackerError::LocalLogWriteFailure(e));
                }
                d.state.local_written += 1;
            }
        }
        if self.inner.remote.is_some() {
            self.inner.queue.lock().expect("queue lock").push_back(statement);
        }
        Ok(())
    }

    pub fn delivery_state(&self) -> DeliveryState {
        let mut s = self.inner.delivery.lock().expect("delivery lock").state.clone();
        s.pending = self.inner.queue.lock().expect("queue lock").len();
        s
    }

    /// Sends queued statements in batches of at most 100 until the queue is
    /// empty or the sink fails. Honors the backoff delay unless `force`.
    pub fn flush_with(&self, force: bool) -> DeliveryState {
        let Some(remote) = self.inner.remote.as_ref() else {
            return self.delivery_state();
        };
        let _one_flusher = self.inner.flushing.lock().expect("flush lock");
        loop {
            {
                let d = self.inner.delivery.lock().expect("delivery lock");
                if !force && d.next_attempt.is_some_and(|t| Instant::now() < t) {
                    break;
                }
            }
            let batch: Vec<AnalyticsStatement> = {
                let q = self.inner.queue.lock().expect("queue lock");
                q.iter().take(MAX_BATCH).cloned().collect()
            };
            if batch.is_empty() {
                break;
            }
            let sent = remote.send(&batch);
            let mut d = self.inner.delivery.lock().expect("delivery lock");
            match sent {
                Ok(()) => {
                    self.inner.queue.lock().expect("queue lock").drain(..batch.len());
                    d.state.delivered += batch.len() as u64;
                    d.state.consecutive_failures = 0;
                    d.next_attempt = None;
                }
                Err(e) => {
                    d.state.failed += 1;
                    d.state.consecutive_failures += 1;
                    d.state.last_error = Some(e.to_string());
                    d.next_attempt =
                        Some(Instant::now() + self.inner.backoff.delay(d.state.consecutive_failures));
                    break;
                }
            }
        }
        self.delivery_state()
    }

    pub fn flush(&self) -> DeliveryState {
        self.flush_with(false)
    }

    /// Starts a thread that flushes every `interval` until [`Tracker::shutdown`].
    pub fn spawn_deliverer(&self, interval: Duration) -> Option<JoinHandle<()>> {
        self.inner.remote.as_ref()?;
        let me = self.clone();
        Some(std::thread::spawn(move || {
            while !me.inner.stop.load(Ordering::Relaxed) {
                me.flush();
                std::thread::sleep(interval);
            }
        }))
    }

    pub fn shutdown(&self) {
        self.inner.stop.store(true, Ordering::Relaxed);
    }
}

fn append_line(path: &Path, line: &str) -> Result<(), String> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
    }
    let mut f = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| format!("{}: {e}", path.display()))?;
    let mut buf = String::with_capacity(line.len() + 1);
    buf.push_str(line);
    buf.push('\n');
    f.write_all(buf.as_bytes())
        .map_err(|e| format!("{}: {e}", path.display()))
}
