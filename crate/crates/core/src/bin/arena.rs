// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use clap::{Parser, Subcommand};

use arena_core::analytics::{HttpSink, Tracker, TrackerConfig};
use arena_core::game::{replay_log, scoreboard, SystemClock};
use arena_core::lang::{compile, TypedUnit, DEFAULT_STEP_BUDGET};
use arena_core::mutation::{enumerate_mutants, MutationOperator};
use arena_core::runner::{bounded_equivalence_oracle, kill_check, validate_test, Assertion, Domain};
use arena_core::server::{serve, GameStore};
use arena_core::sim::{run_simulation, SimConfig};

#[derive(Parser)]
#[command(name = "arena", version, about = "Mutation-testing duel: tools, simulations and the game server")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// List the mutants the enumerator generates for a unit.
    Mutate {
        unit: PathBuf,
        /// Comma-separated operators (AOR, ROR, LOR, UOI, CRP, SDL). Default: all.
        #[arg(long)]
        ops: Option<String>,
    },
    /// Validate a test (a JSON array of assertions) against a unit.
    Test {
        unit: PathBuf,
        tests: PathBuf,
        /// Also run the test against these mutant sources.
        #[arg(long = "mutant")]
        mutants: Vec<PathBuf>,
    },
    /// Exhaustively compare two units on one function over a bounded domain.
    Equivalence {
        original: PathBuf,
        mutant: PathBuf,
        #[arg(long = "fn")]
        function: String,
        /// Integer range for int parameters, `lo..hi` inclusive.
        #[arg(long, allow_hyphen_values = true, default_value = "-8..8")]
        domain: String,
    },
    /// Fold an event log and print its scoreboard and state hash.
    Replay {
        log: PathBuf,
        /// Fail unless the folded state has this hash.
        #[arg(long)]
        expect_hash: Option<String>,
    },
    /// Play seeded bot-vs-bot games.
    Sim {
        #[arg(long)]
        unit: PathBuf,
        #[arg(long, default_value_t = 100)]
        games: u32,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Report destination; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Where to write game logs (under `games/`).
        #[arg(long)]
        data_dir: Option<PathBuf>,
    },
    /// Run the HTTP game server.
    Serve {
        #[arg(long, env = "ARENA_PORT", default_value_t = 8080)]
        port: u16,
        #[arg(long, env = "ARENA_DATA_DIR", default_value = "./data")]
        data_dir: PathBuf,
        /// Collector base URL; statements are POSTed to `<url>/statements`.
        #[arg(long, env = "ARENA_ANALYTICS_URL")]
        analytics_url: Option<String>,
        #[arg(long)]
        analytics_disabled: bool,
    },
}

struct Failure {
    code: String,
    message: String,
}

impl Failure {
    fn new(code: impl Into<String>, message: impl Into<String>) -> Self {
        Failure {
            code: code.into(),
            message: message.into(),
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| {
        let code = if e.kind() == std::io::ErrorKind::NotFound {
            "FILE_NOT_FOUND"
        } else {
            "IO_ERROR"
        };
        Failure::new(code, format!("{}: {e}", path.display()))
    })
}

fn load_unit(path: &Path) -> Result<TypedUnit, Failure> {
    let src = read(path)?;
    let unit = compile(&src).map_err(|e| Failure::new(e.code(), format!("{}: {e}", path.display())))?;
    let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("unit");
    Ok(unit.named(name))
}

fn write_out(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::new("IO_ERROR", format!("{}: {e}", p.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error[{}]: {}", f.code, f.message);
            ExitCode::from(1)
        }
    }
}

fn run(cmd: Cmd) -> Result<(), Failure> {
    match cmd {
        Cmd::Mutate { unit, ops } => {
            let unit = load_unit(&unit)?;
            let ops = match ops {
                Some(list) => MutationOperator::parse_list(&list).map_err(|e| Failure::new("UNKNOWN_OPERATOR", e.to_string()))?,
                None => MutationOperator::ALL.to_vec(),
            };
            for c in enumerate_mutants(&unit, &ops) {
                let mutated = if c.mutated_fragment.is_empty() {
                    "<deleted>"
                } else {
                    c.mutated_fragment.as_str()
                };
                println!("{} {} {} -> {}", c.operator, c.site, c.original_fragment, mutated);
            }
            Ok(())
        }
        Cmd::Test { unit, tests, mutants } => {
            let original = load_unit(&unit)?;
            let assertions: Vec<Assertion> = serde_json::from_str(&read(&tests)?)
                .map_err(|e| Failure::new("INVALID_JSON", format!("{}: {e}", tests.display())))?;
            let test = validate_test(&original, &assertions, DEFAULT_STEP_BUDGET)
                .map_err(|e| Failure::new(e.code(), e.to_string()))?;
            let lines: Vec<String> = test.covered_lines.iter().map(u32::to_string).collect();
            println!("valid, covers lines {}", lines.join(","));
            for path in mutants {
                let mutant = load_unit(&path)?;
                let verdict = match kill_check(&original, &mutant, &test, DEFAULT_STEP_BUDGET) {
                    arena_core::runner::KillResult::Killed(i) => format!("killed by {}", test.assertions[i]),
                    arena_core::runner::KillResult::Survived => "survived".to_string(),
                };
                println!("{}: {verdict}", path.display());
            }
            Ok(())
        }
        Cmd::Equivalence {
            original,
            mutant,
            function,
            domain,
        } => {
            let a = load_unit(&original)?;
            let b = load_unit(&mutant)?;
            let (lo, hi) = parse_range(&domain)?;
            let f = a
                .function(&function)
                .ok_or_else(|| Failure::new("UNKNOWN_FUNCTION", format!("unknown function `{function}`")))?;
            let domain = Domain::with_int_range(f, lo, hi);
            let verdict = bounded_equivalence_oracle(&a, &b, &function, &domain, DEFAULT_STEP_BUDGET)
                .map_err(|e| Failure::new(e.code(), e.to_string()))?;
            println!("{}", serde_json::to_string(&verdict).expect("verdicts serialize"));
            Ok(())
        }
        Cmd::Replay { log, expect_hash } => {
            let text = read(&log)?;
            let game = replay_log(&text).map_err(|e| Failure::new(e.code(), e.to_string()))?;
            let hash = game.state().state_hash();
            let again = replay_log(&arena_core::sim::log_text(game.events()))
                .map_err(|e| Failure::new(e.code(), e.to_string()))?;
            if again.state().state_hash() != hash {
                return Err(Failure::new("HASH_MISMATCH", "replaying the re-serialized log gives a different state"));
            }
            if let Some(want) = expect_hash {
                if want != hash {
                    return Err(Failure::new("HASH_MISMATCH", format!("expected {want}, folded state is {hash}")));
                }
            }
            let board = scoreboard(game.state());
            for p in &board.players {
                println!("{} {} ({}, {}): {}", p.player, p.name, p.role, p.team, p.points);
            }
            for (team, points) in &board.teams {
                println!("team {team}: {points}");
            }
            println!("events: {}", game.state().last_seq);
            println!("state hash: {hash}");
            Ok(())
        }
        Cmd::Sim {
            unit,
            games,
            seed,
            out,
            data_dir,
        } => {
            let source = read(&unit)?;
            let name = unit.file_stem().and_then(|s| s.to_str()).unwrap_or("unit");
            let (report, _) = run_simulation(name, &source, games, seed, &SimConfig::default(), data_dir.as_deref())
                .map_err(|e| Failure::new(e.code(), e.to_string()))?;
            write_out(out.as_deref(), &report.to_canonical_json())?;
            eprintln!(
                "{} games in {} ms; scores {:?}",
                report.games_played, report.wall_clock_ms, report.score_distribution
            );
            Ok(())
        }
        Cmd::Serve {
            port,
            data_dir,
            analytics_url,
            analytics_disabled,
        } => serve_cmd(port, data_dir, analytics_url, analytics_disabled),
    }
}

fn parse_range(s: &str) -> Result<(i64, i64), Failure> {
    let bad = || Failure::new("INVALID_DOMAIN", format!("expected `lo..hi`, got `{s}`"));
    let (lo, hi) = s.split_once("..").ok_or_else(bad)?;
    let lo: i64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: i64 = hi.trim().parse().map_err(|_| bad())?;
    if lo > hi {
        return Err(bad());
    }
    Ok((lo, hi))
}

fn serve_cmd(port: u16, data_dir: PathBuf, analytics_url: Option<String>, disabled: bool) -> Result<(), Failure> {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .with_writer(std::io::stderr)
        .init();
    let tracker = if disabled {
        Tracker::disabled()
    } else {
        Tracker::new(TrackerConfig {
            log_dir: Some(data_dir.join("analytics")),
            remote: analytics_url.map(|u| Box::new(HttpSink::new(&u)) as _),
            ..TrackerConfig::default()
        })
    };
    let deliverer = tracker.spawn_deliverer(Duration::from_secs(1));
    let store = GameStore::open(&data_dir, tracker.clone(), Arc::new(SystemClock))
        .map_err(|e| Failure::new(e.code(), e.to_string()))?;
    let runtime = tokio::runtime::Runtime::new().map_err(|e| Failure::new("IO_ERROR", e.to_string()))?;
    let addr = SocketAddr::from(([0, 0, 0, 0], port));
    runtime
        .block_on(serve(Arc::new(store), addr))
        .map_err(|e| Failure::new("IO_ERROR", e.to_string()))?;
    tracker.shutdown();
    tracker.flush_with(true);
    if let Some(h) = deliverer {
        let _ = h.join();
    }
    Ok(())
}
