//! Shared fixtures for the benchmarks.

use belnap::{parse_program, Program};

pub const P1: &str = include_str!("../../../fixtures/p1.pl");
pub const P4: &str = include_str!("../../../fixtures/p4.pl");
pub const ODD: &str = include_str!("../../../fixtures/odd.pl");
pub const REV: &str = include_str!("../../../fixtures/rev.pl");
pub const APPEND: &str = include_str!("../../../fixtures/append_modes.pl");
pub const HEAD: &str = include_str!("../../../fixtures/head_bug.pl");
pub const HEAD_INTERP: &str = include_str!("../../../fixtures/head.interp");

pub fn program(src: &str) -> Program {
    parse_program(src).expect("fixture parses")
}

/// rev/2 with the append/3 it calls.
pub fn rev() -> Program {
    let mut p = program(REV);
    p.extend(program(APPEND)).expect("fixtures combine");
    p
}
