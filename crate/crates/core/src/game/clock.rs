// SPDX-License-Identifier: Apache-2.0

use std::sync::atomic::{AtomicU64, Ordering};

use chrono::{DateTime, SecondsFormat, Utc};

/// Source of event timestamps (UTC, ISO-8601, millisecond precision).
pub trait Clock: Send + Sync {
    fn now(&self) -> String;
}

pub fn format_timestamp(t: DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::Millis, true)
}

#[derive(Debug, Default, Clone, Copy)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&self) -> String {
        format_timestamp(Utc::now())
    }
}

/// Deterministic clock: starts at a fixed instant and advances one second
/// per reading. Used by simulations and tests.
#[derive(Debug)]
pub struct LogicalClock {
    start: i64,
    ticks: AtomicU64,
}

impl LogicalClock {
    /// 2024-01-01T00:00:00Z.
    pub const DEFAULT_START: i64 = 1_704_067_200;

    pub fn new(start_unix_secs: i64) -> Self {
        LogicalClock {
            start: start_unix_secs,
            ticks: AtomicU64::new(0),
        }
    }
}

impl Default for LogicalClock {
    fn default() -> Self {
        Self::new(Self::DEFAULT_START)
    }
}

impl Clock for LogicalClock {
    fn now(&self) -> String {
        let t = self.ticks.fetch_add(1, Ordering::Relaxed) as i64;
        let dt = DateTime::from_timestamp(self.start + t, 0).unwrap_or_default();
        format_timestamp(dt)
    }
}
