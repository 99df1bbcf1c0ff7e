// SPDX-License-Identifier: Apache-2.0

//! C ABI over `arena-core`.
//!
//! Conventions: every fallible function returns an [`ArenaStatus`] and writes
//! its result through an out pointer. Strings going in are NUL-terminated
//! UTF-8; strings coming out are NUL-terminated JSON owned by the caller and
//! released with [`arena_string_free`]. Handles are opaque and released with
//! their `_free` function. After a failure, [`arena_last_error_code`] and
//! [`arena_last_error_message`] describe it (per thread).

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use arena_core::game::{replay_log, scoreboard, Game};
use arena_core::lang::{compile, evaluate_call, TypedUnit, Value};
use arena_core::mutation::{enumerate_mutants, MutationOperator};
use arena_core::runner::{bounded_equivalence_oracle, Domain};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArenaStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    InvalidJson = 3,
    /// The source failed to parse or typecheck.
    CompileError = 4,
    /// Unknown function or arguments that do not fit its signature.
    CallError = 5,
    EquivalenceError = 6,
    /// The event log is corrupt or does not replay.
    ReplayError = 7,
    InvalidArgument = 8,
    Panic = 99,
}

/// A compiled unit.
pub struct ArenaUnit(TypedUnit);

/// A replayed game.
pub struct ArenaGame(Game);

struct LastError {
    code: String,
    message: String,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<LastError>> = const { RefCell::new(None) };
}

struct Fail(ArenaStatus, String, String);

fn fail(status: ArenaStatus, code: &str, message: impl Into<String>) -> Fail {
    Fail(status, code.to_string(), message.into())
}

/// Runs `f`, records any failure for the current thread and converts panics.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> ArenaStatus {
    let result = catch_unwind(AssertUnwindSafe(f))
        .unwrap_or_else(|_| Err(fail(ArenaStatus::Panic, "PANIC", "internal error")));
    match result {
        Ok(()) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            ArenaStatus::Ok
        }
        Err(Fail(status, code, message)) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = Some(LastError { code, message }));
            status
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(fail(ArenaStatus::NullArgument, "NULL_ARGUMENT", format!("`{name}` is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(ArenaStatus::InvalidUtf8, "INVALID_UTF8", format!("`{name}` is not UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, name: &str) -> Result<&'a T, Fail> {
    p.as_ref()
        .ok_or_else(|| fail(ArenaStatus::NullArgument, "NULL_ARGUMENT", format!("`{name}` is null")))
}

fn out_arg<T>(p: *mut T) -> Result<(), Fail> {
    if p.is_null() {
        Err(fail(ArenaStatus::NullArgument, "NULL_ARGUMENT", "output pointer is null"))
    } else {
        Ok(())
    }
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> Result<(), Fail> {
    let c = CString::new(s).map_err(|_| fail(ArenaStatus::Panic, "INTERNAL", "interior NUL in output"))?;
    *out = c.into_raw();
    Ok(())
}

fn owned(s: &str) -> *mut c_char {
    CString::new(s).map_or(ptr::null_mut(), CString::into_raw)
}

/// Compiles MiniLang `source`. On success `*out` holds a unit to release
/// with [`arena_unit_free`].
///
/// # Safety
/// `source` must be a valid NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn arena_unit_parse(source: *const c_char, out: *mut *mut ArenaUnit) -> ArenaStatus {
    guard(|| {
        out_arg(out)?;
        let src = str_arg(source, "source")?;
        let unit = compile(src).map_err(|e| fail(ArenaStatus::CompileError, e.code(), e.to_string()))?;
        *out = Box::into_raw(Box::new(ArenaUnit(unit)));
        Ok(())
    })
}

/// # Safety
/// `unit` must be null or a pointer from [`arena_unit_parse`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn arena_unit_free(unit: *mut ArenaUnit) {
    if !unit.is_null() {
        drop(Box::from_raw(unit));
    }
}

/// Calls `function` with `args_json` (a JSON array of ints, bools and int
/// arrays) under a step budget. `*out_json` receives
/// `{"outcome": ..., "covered_lines": [...], "steps_used": n}`.
///
/// # Safety
/// Pointers must be valid as described in the module conventions.
#[no_mangle]
pub unsafe extern "C" fn arena_unit_evaluate(
    unit: *const ArenaUnit,
    function: *const c_char,
    args_json: *const c_char,
    step_budget: u64,
    out_json: *mut *mut c_char,
) -> ArenaStatus {
    guard(|| {
        out_arg(out_json)?;
        let unit = &ref_arg(unit, "unit")?.0;
        let function = str_arg(function, "function")?;
        let args: Vec<Value> = serde_json::from_str(str_arg(args_json, "args_json")?)
            .map_err(|e| fail(ArenaStatus::InvalidJson, "INVALID_JSON", e.to_string()))?;
        let (outcome, trace) = evaluate_call(unit, function, &args, step_budget)
            .map_err(|e| fail(ArenaStatus::CallError, e.code(), e.to_string()))?;
        let body = serde_json::json!({
            "outcome": outcome,
            "covered_lines": trace.covered_lines,
            "steps_used": trace.steps_used,
        });
        write_string(out_json, body.to_string())
    })
}

/// Enumerates mutants for a comma-separated operator list (`"AOR,ROR"`), or
/// all operators when `operators` is null. `*out_json` receives an array of
/// candidates with their mutated sources.
///
/// # Safety
/// Pointers must be valid as described in the module conventions.
#[no_mangle]
pub unsafe extern "C" fn arena_mutants_enumerate(
    unit: *const ArenaUnit,
    operators: *const c_char,
    out_json: *mut *mut c_char,
) -> ArenaStatus {
    guard(|| {
        out_arg(out_json)?;
        let unit = &ref_arg(unit, "unit")?.0;
        let ops = if operators.is_null() {
            MutationOperator::ALL.to_vec()
        } else {
            MutationOperator::parse_list(str_arg(operators, "operators")?)
                .map_err(|e| fail(ArenaStatus::InvalidArgument, "UNKNOWN_OPERATOR", e.to_string()))?
        };
        let candidates = enumerate_mutants(unit, &ops);
        write_string(out_json, serde_json::to_string(&candidates).expect("candidates serialize"))
    })
}

/// Compares `function` in both units on every tuple with int parameters in
/// `[lo, hi]` (bool and array parameters use their default domains).
/// `*out_json` receives the verdict.
///
/// # Safety
/// Pointers must be valid as described in the module conventions.
#[no_mangle]
pub unsafe extern "C" fn arena_equivalence_check(
    original: *const ArenaUnit,
    mutant: *const ArenaUnit,
    function: *const c_char,
    lo: i64,
    hi: i64,
    step_budget: u64,
    out_json: *mut *mut c_char,
) -> ArenaStatus {
    guard(|| {
        out_arg(out_json)?;
        let original = &ref_arg(original, "original")?.0;
        let mutant = &ref_arg(mutant, "mutant")?.0;
        let function = str_arg(function, "function")?;
        if lo > hi {
            return Err(fail(ArenaStatus::InvalidArgument, "INVALID_DOMAIN", "lo is greater than hi"));
        }
        let f = original.function(function).ok_or_else(|| {
            fail(ArenaStatus::CallError, "UNKNOWN_FUNCTION", format!("unknown function `{function}`"))
        })?;
        let domain = Domain::with_int_range(f, lo, hi);
        let verdict = bounded_equivalence_oracle(original, mutant, function, &domain, step_budget)
            .map_err(|e| fail(ArenaStatus::EquivalenceError, e.code(), e.to_string()))?;
        write_string(out_json, serde_json::to_string(&verdict).expect("verdicts serialize"))
    })
}

/// Folds an NDJSON event log. On success `*out` holds a game to release
/// with [`arena_game_free`].
///
/// # Safety
/// Pointers must be valid as described in the module conventions.
#[no_mangle]
pub unsafe extern "C" fn arena_game_replay(log: *const c_char, out: *mut *mut ArenaGame) -> ArenaStatus {
    guard(|| {
        out_arg(out)?;
        let game = replay_log(str_arg(log, "log")?)
            .map_err(|e| fail(ArenaStatus::ReplayError, e.code(), e.to_string()))?;
        *out = Box::into_raw(Box::new(ArenaGame(game)));
        Ok(())
    })
}

/// Canonical JSON of the folded state.
///
/// # Safety
/// Pointers must be valid as described in the module conventions.
#[no_mangle]
pub unsafe extern "C" fn arena_game_state_json(game: *const ArenaGame, out_json: *mut *mut c_char) -> ArenaStatus {
    guard(|| {
        out_arg(out_json)?;
        write_string(out_json, ref_arg(game, "game")?.0.state().to_canonical_json())
    })
}

/// Hex SHA-256 of the canonical state.
///
/// # Safety
/// Pointers must be valid as described in the module conventions.
#[no_mangle]
pub unsafe extern "C" fn arena_game_state_hash(game: *const ArenaGame, out_hex: *mut *mut c_char) -> ArenaStatus {
    guard(|| {
        out_arg(out_hex)?;
        write_string(out_hex, ref_arg(game, "game")?.0.state().state_hash())
    })
}

/// Per-player, per-team, per-mutant and per-test points.
///
/// # Safety
/// Pointers must be valid as described in the module conventions.
#[no_mangle]
pub unsafe extern "C" fn arena_game_scoreboard_json(
    game: *const ArenaGame,
    out_json: *mut *mut c_char,
) -> ArenaStatus {
    guard(|| {
        out_arg(out_json)?;
        let board = scoreboard(ref_arg(game, "game")?.0.state());
        write_string(out_json, serde_json::to_string(&board).expect("scoreboard serializes"))
    })
}

/// # Safety
/// `game` must be null or a pointer from [`arena_game_replay`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn arena_game_free(game: *mut ArenaGame) {
    if !game.is_null() {
        drop(Box::from_raw(game));
    }
}

/// The module error code of this thread's last failure (for example
/// `SYNTAX_ERROR`), or null. Release with [`arena_string_free`].
#[no_mangle]
pub extern "C" fn arena_last_error_code() -> *mut c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null_mut(), |e| owned(&e.code)))
}

/// Human-readable message for this thread's last failure, or null.
/// Release with [`arena_string_free`].
#[no_mangle]
pub extern "C" fn arena_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null_mut(), |e| owned(&e.message)))
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn arena_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Library version, statically allocated.
#[no_mangle]
pub extern "C" fn arena_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
