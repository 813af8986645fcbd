//! Terms, clauses, declarations, parsing, completion and carriers.

mod completion;
mod display;
mod lexer;
mod parser;
mod program;
mod term;
mod types;
mod universe;

pub use completion::{complete, head_grounding, Body, Disjunct, GroundingError, PredicateDefinition};
pub use display::{conj_to_string, needs_quotes, term_string};
pub use parser::{parse_statements, parse_term, Fixity, OpTable, Statement};
pub use program::{
    body_dnf, parse_program, Declarations, Mode, ModeArg, ModeDecl, ModeGroup, PredDecl, Program, SpecStatement,
    TypeDecl, TypeExpr,
};
pub use term::{
    canonical_variant, depth, generalizes, match_atom, match_term, mgu, prune, Atom, Clause, Fresh, Literal, PredKey,
    Substitution, Term, CONS, DEEP, NIL,
};
pub(crate) use program::program_from_statements;
pub use universe::{Elem, Universe, UniverseError, DEFAULT_CAP};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{line}:{col}: {msg}")]
pub struct SyntaxError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

impl SyntaxError {
    pub fn new(line: usize, col: usize, msg: impl Into<String>) -> SyntaxError {
        SyntaxError { line, col, msg: msg.into() }
    }
}
