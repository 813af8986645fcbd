//! Computation states `∃V (D1 ∨ … ∨ Dm)` and their successors.
//!
//! A step selects a positive literal and replaces it by the body of its
//! definition at that head instance, distributing the body's disjuncts over
//! the rest of the conjunction. Under a ⊒⁴-model the value of every ground
//! instance of the free variables can only drop in the information ordering.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use crate::bilattice::{info_leq, TruthValue4};
use crate::interp::{eval_body, ExtensionalInterpretation, InterpError};
use crate::models::{check_model, ModelError, Relation};
use crate::syntax::{Atom, Body, Literal, Program, Substitution, Term, Universe};


#[derive(Debug, thiserror::Error)]
pub enum StateError {
    #[error("no disjunct {0}")]
    NoDisjunct(usize),
    #[error("disjunct {0} has no literal {1}")]
    NoLiteral(usize, usize),
    #[error("cannot select the negative literal {0}")]
    Negative(String),
    #[error("variable {0} is both free and local")]
    Clash(String),
    #[error("variable {0} is neither free nor local")]
    Undeclared(String),
    #[error("grounding must bind exactly the free variables")]
    Grounding,
    #[error("the two states have different free variables")]
    FreeVars,
    #[error("carrier has {0} elements, too many groundings")]
    TooMany(usize),
    #[error(transparent)]
    Interp(#[from] InterpError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Upper bound on the groundings `check_step_monotonicity` enumerates.
pub const MAX_GROUNDINGS: usize = 1 << 16;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComputationState {
    pub free_vars: Vec<String>,
    pub local_vars: Vec<String>,
    pub disjuncts: Vec<Vec<Literal>>,
}

impl ComputationState {
    /// The state of a top-level goal; all its variables are free.
    pub fn goal(lits: Vec<Literal>) -> ComputationState {
        let mut free_vars = Vec::new();
        for l in &lits {
            l.vars_into(&mut free_vars);
        }
        dedup(&mut free_vars);
        ComputationState { free_vars, local_vars: Vec::new(), disjuncts: vec![lits] }
    }

    pub fn new(free_vars: Vec<String>, local_vars: Vec<String>, disjuncts: Vec<Vec<Literal>>) -> Result<Self, StateError> {
        let s = ComputationState { free_vars, local_vars, disjuncts };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), StateError> {
        if let Some(v) = self.free_vars.iter().find(|v| self.local_vars.contains(v)) {
            return Err(StateError::Clash(v.clone()));
        }
        for v in self.vars() {
            if !self.free_vars.contains(&v) && !self.local_vars.contains(&v) {
                return Err(StateError::Undeclared(v));
            }
        }
        Ok(())
    }

    /// Variables occurring in the disjuncts.
    pub fn vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        for d in &self.disjuncts {
            for l in d {
                l.vars_into(&mut out);
            }
        }
        dedup(&mut out);
        out
    }

    fn all_names(&self) -> BTreeSet<String> {
        self.free_vars.iter().chain(&self.local_vars).cloned().chain(self.vars()).collect()
    }

    /// Drops disjuncts containing a ground equality between distinct terms.
    pub fn simplify(&self) -> ComputationState {
        let disjuncts = self
            .disjuncts
            .iter()
            .filter(|d| {
                !d.iter().any(|l| match l {
                    Literal::Pos(a) if a.is_eq() && a.is_ground() => a.args[0] != a.args[1],
                    _ => false,
                })
            })
            .cloned()
            .collect();
        ComputationState { disjuncts, ..self.clone() }
    }

    pub fn as_body(&self) -> Body {
        Body { locals: self.local_vars.clone(), disjuncts: self.disjuncts.clone() }
    }
}

impl fmt::Display for ComputationState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.free_vars.is_empty() {
            write!(f, "[{}] ", self.free_vars.join(","))?;
        }
        write!(f, "{}", self.as_body())
    }
}

fn dedup(v: &mut Vec<String>) {
    let mut seen = BTreeSet::new();
    v.retain(|x| seen.insert(x.clone()));
}

/// A name based on `base` not in `used`; the result is added to `used`.
fn fresh(base: &str, used: &mut BTreeSet<String>) -> String {
    let mut n = 1;
    loop {
        let cand = format!("{}_{}", base, n);
        if used.insert(cand.clone()) {
            return cand;
        }
        n += 1;
    }
}

/// Simultaneous substitution; bindings are not chased, so a variable may be
/// mapped to a term containing itself or another mapped variable.
fn subst(t: &Term, map: &HashMap<String, Term>) -> Term {
    match t {
        Term::Var(v) => map.get(v).cloned().unwrap_or_else(|| t.clone()),
        Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| subst(a, map)).collect()),
    }
}

/// Resolve literal `j` of disjunct `i` against its definition. Equalities
/// and `error/1` have no definition and are left alone. A predicate without
/// clauses has the empty body, so the disjunct disappears.
pub fn successor(s: &ComputationState, i: usize, j: usize, p: &Program) -> Result<ComputationState, StateError> {
    let d = s.disjuncts.get(i).ok_or(StateError::NoDisjunct(i))?;
    let lit = d.get(j).ok_or(StateError::NoLiteral(i, j))?;
    let atom = match lit {
        Literal::Neg(_) => return Err(StateError::Negative(lit.to_string())),
        Literal::Pos(a) => a,
    };
    if atom.is_eq() || atom.is_error() {
        return Ok(s.clone());
    }
    let mut out = s.clone();
    let mut replacement = Vec::new();
    if let Some(def) = p.definition(&atom.key()) {
        let mut used = s.all_names();
        used.extend(def.head_vars.iter().chain(&def.local_vars).cloned());
        let mut map: HashMap<String, Term> = def.head_vars.iter().cloned().zip(atom.args.iter().cloned()).collect();
        for w in &def.local_vars {
            let base = w.trim_start_matches('_');
            let base = if base.is_empty() { "W" } else { base };
            let name = fresh(base, &mut used);
            map.insert(w.clone(), Term::var(name.clone()));
            out.local_vars.push(name);
        }
        for b in &def.disjuncts {
            let mut conj = d[..j].to_vec();
            conj.extend(b.literals.iter().map(|l| l.map_atom(|a| Atom::new(a.pred.clone(), a.args.iter().map(|t| subst(t, &map)).collect()))));
            conj.extend_from_slice(&d[j + 1..]);
            replacement.push(conj);
        }
    }
    out.disjuncts.splice(i..i + 1, replacement);
    Ok(out)
}

/// Positions of literals a step may select.
pub fn selectable(s: &ComputationState) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for (i, d) in s.disjuncts.iter().enumerate() {
        for (j, l) in d.iter().enumerate() {
            if let Literal::Pos(a) = l {
                if !a.is_eq() && !a.is_error() {
                    out.push((i, j));
                }
            }
        }
    }
    out
}

/// `M(Sθ)` with the local variables ranging over the carrier of `m`.
pub fn eval_state(
    m: &ExtensionalInterpretation,
    p: &Program,
    s: &ComputationState,
    theta: &Substitution,
) -> Result<TruthValue4, StateError> {
    if theta.len() != s.free_vars.len() || s.free_vars.iter().any(|v| !theta.get(v).is_some_and(Term::is_ground)) {
        return Err(StateError::Grounding);
    }
    let body = Body {
        locals: s.local_vars.clone(),
        disjuncts: s.disjuncts.iter().map(|d| d.iter().map(|l| l.apply(theta)).collect()).collect(),
    };
    Ok(eval_body(p, m, &body)?)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepViolation {
    pub theta: Vec<(String, Term)>,
    pub before: TruthValue4,
    pub after: TruthValue4,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepVerdict {
    /// Whether `M` is a ⊒⁴-model of the program.
    pub is_model: bool,
    pub groundings: usize,
    pub violations: Vec<StepViolation>,
}

impl StepVerdict {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Every grounding of the free variables over `carrier`.
pub fn groundings(vars: &[String], carrier: &Universe) -> Result<Vec<Substitution>, StateError> {
    let terms: Vec<Term> = carrier.elems().map(|e| carrier.term_of(e)).collect();
    let total = (terms.len() as u128).checked_pow(vars.len() as u32).unwrap_or(u128::MAX);
    if total > MAX_GROUNDINGS as u128 {
        return Err(StateError::TooMany(carrier.len()));
    }
    let mut out = vec![Substitution::new()];
    for v in vars {
        out = out
            .into_iter()
            .flat_map(|s| {
                terms.iter().map(move |t| {
                    let mut s = s.clone();
                    s.bind(v.clone(), t.clone());
                    s
                })
            })
            .collect();
    }
    Ok(out)
}

/// Checks `M(Sθ) ⊒ M(S′θ)` for every grounding θ. Whether `M` is a
/// ⊒⁴-model is reported rather than required, so a non-model can be probed.
pub fn check_step_monotonicity(
    m: &ExtensionalInterpretation,
    p: &Program,
    before: &ComputationState,
    after: &ComputationState,
) -> Result<StepVerdict, StateError> {
    let a: BTreeSet<_> = before.free_vars.iter().collect();
    let b: BTreeSet<_> = after.free_vars.iter().collect();
    if a != b {
        return Err(StateError::FreeVars);
    }
    let is_model = check_model(p, m, Relation::InfoGeq4)?.holds;
    let carrier: Arc<Universe> = m.carrier().clone();
    let thetas = groundings(&before.free_vars, &carrier)?;
    let mut violations = Vec::new();
    for theta in &thetas {
        let v0 = eval_state(m, p, before, theta)?;
        let v1 = eval_state(m, p, after, theta)?;
        if !info_leq(v1, v0) {
            let theta = before.free_vars.iter().map(|v| (v.clone(), theta.get(v).unwrap().clone())).collect();
            violations.push(StepViolation { theta, before: v0, after: v1 });
        }
    }
    Ok(StepVerdict { is_model, groundings: thetas.len(), violations })
}

/// Parses a goal such as `implies(X, f)` into its initial state.
pub fn parse_goal(src: &str) -> Result<ComputationState, crate::syntax::SyntaxError> {
    let t = crate::syntax::parse_term(src)?;
    let dnf = crate::syntax::body_dnf(&t, 1)?;
    let mut free_vars = Vec::new();
    for d in &dnf {
        for l in d {
            l.vars_into(&mut free_vars);
        }
    }
    dedup(&mut free_vars);
    Ok(ComputationState { free_vars, local_vars: Vec::new(), disjuncts: dnf })
}
