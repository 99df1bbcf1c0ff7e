// SPDX-License-Identifier: Apache-2.0

//! Test-only oracles shared by the acceptance and property targets.

#![allow(dead_code)]

pub mod gen;
pub mod reference;
pub mod scanner;

use arena_core::lang::{compile, print_unit};

/// Printer output of the compiled source: equal for structurally equal units.
pub fn canonical_source(src: &str) -> Option<String> {
    compile(src).ok().map(|u| print_unit(u.unit()))
}
