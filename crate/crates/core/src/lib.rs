//! Four-valued semantics for pure Prolog with negation.

pub mod bilattice;
pub mod debug;
pub mod engine;
pub mod models;
pub mod modes;
pub mod interp;
pub mod sld;
pub mod speccheck;
pub mod states;
pub mod syntax;

pub use bilattice::TruthValue4;
pub use syntax::{parse_program, Atom, Literal, PredKey, Program, Term, Universe};
