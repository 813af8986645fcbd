//! The immediate consequence operator, its least fixed point over a finite
//! carrier, and a depth-k approximating analysis over non-ground atoms.

mod depthk;

use std::sync::Arc;

pub use depthk::{analyze_depthk, concretize, AbstractInterpretation};

use crate::interp::{CompiledProgram, ExtensionalInterpretation, InterpError};
use crate::syntax::{Program, Universe};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EngineError {
    #[error(transparent)]
    Interp(#[from] InterpError),
    #[error("depth-k analysis supports only programs without negation")]
    Negation,
    #[error("depth-k analysis needs k >= 1")]
    ZeroDepth,
    #[error("more than {0} candidate patterns for {1}; lower k")]
    TooManyPatterns(usize, String),
}

/// Φ_P(I): every atom takes the value of its body under `i`. `i` must use the
/// predicate numbering of `cp`.
pub fn phi(cp: &CompiledProgram, i: &ExtensionalInterpretation) -> ExtensionalInterpretation {
    let mut out = i.clone();
    for (p, key) in cp.preds().iter().enumerate() {
        for o in 0..i.table(p).len() {
            let args = i.args_at(key.arity, o);
            out.table_mut(p)[o] = cp.head_value(i, p, &args);
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct FixpointReport {
    pub result: ExtensionalInterpretation,
    pub iterations: usize,
    /// One more application of Φ_P changes nothing.
    pub stable: bool,
    pub depth_bound: usize,
    /// The program negates atoms and the carrier collapses deep terms, so
    /// values near the depth bound may differ from the unbounded semantics.
    pub boundary_negation: bool,
}

pub const DEFAULT_MAX_ITERS: usize = 10_000;

/// Iterate Φ_P from the everywhere-u interpretation.
pub fn lfp(cp: &CompiledProgram, max_iters: usize) -> Result<FixpointReport, EngineError> {
    let mut cur = cp.bottom()?;
    let mut iterations = 0;
    let mut stable = false;
    while iterations < max_iters {
        let next = phi(cp, &cur);
        iterations += 1;
        debug_assert!(cur.leq(&next), "iteration from bottom is a chain");
        if next == cur {
            stable = true;
            break;
        }
        cur = next;
    }
    let u = cp.carrier();
    Ok(FixpointReport {
        result: cur,
        iterations,
        stable,
        depth_bound: u.depth_bound(),
        boundary_negation: cp.has_negation() && u.has_overflow(),
    })
}

/// Least fixed point of a program over the quotient carrier of depth `d`.
pub fn lfp_at_depth(p: &Program, d: usize, max_iters: usize) -> Result<FixpointReport, EngineError> {
    let carrier = Arc::new(Universe::new(&p.alphabet(), d).map_err(InterpError::from)?);
    let cp = CompiledProgram::new(p, carrier)?;
    lfp(&cp, max_iters)
}
