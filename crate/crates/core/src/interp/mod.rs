//! Four-valued interpretations of ground atoms.

mod eval;
mod extensional;
mod pattern;

pub use eval::{eval_body, CompiledProgram};
pub use extensional::{compare, meet_interp, Comparison, ExtensionalInterpretation};
pub use pattern::{PatternInterpretation, PatternRule};

use crate::bilattice::TruthValue4;
use crate::syntax::{Atom, SyntaxError, UniverseError};

/// Largest number of atoms held for a single predicate.
pub const MAX_TABLE: usize = 1 << 26;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum InterpError {
    #[error("atom {0} is outside the carrier")]
    OutsideCarrier(String),
    #[error("atom {0} is not ground")]
    NotGround(String),
    #[error("predicate {0} is not part of the interpretation")]
    UnknownPredicate(String),
    #[error("function symbol {0} is not in the carrier alphabet")]
    UnknownFunctor(String),
    #[error("table for {pred} would exceed {limit} atoms; lower the depth bound")]
    TooLarge { pred: String, limit: usize },
    #[error("interpretations range over different carriers")]
    CarrierMismatch,
    #[error("line {line}: {msg}")]
    Format { line: usize, msg: String },
    #[error("guard of rule at line {line} could not be decided: {msg}")]
    Guard { line: usize, msg: String },
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error(transparent)]
    Universe(#[from] UniverseError),
}

/// Query surface shared by every representation.
pub trait InterpretationView {
    /// Value of a ground atom that is not an equality.
    fn lookup(&self, a: &Atom) -> Result<TruthValue4, InterpError>;

    /// Value of a ground atom. Equalities are t exactly when both sides are
    /// identical terms, whatever the interpretation.
    fn value_of(&self, a: &Atom) -> Result<TruthValue4, InterpError> {
        if !a.is_ground() {
            return Err(InterpError::NotGround(a.to_string()));
        }
        if a.is_eq() {
            return Ok(if a.args[0] == a.args[1] { TruthValue4::T } else { TruthValue4::F });
        }
        if a.is_error() {
            return Ok(TruthValue4::U);
        }
        self.lookup(a)
    }
}

#[cfg(test)]
mod tests;
