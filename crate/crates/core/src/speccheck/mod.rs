//! Specifications with preconditions and postconditions.
//!
//! A specification file holds Δ as definite clauses and one
//! `predicate A precondition α postcondition ω` statement per specified
//! predicate. Conditions are evaluated classically in the least model of Δ
//! over a finite carrier; quantifiers range over the carrier.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use serde::Serialize;

use crate::bilattice::{info_leq, TruthValue4, F, I, T};
use crate::engine::{lfp, EngineError, DEFAULT_MAX_ITERS};
use crate::interp::{CompiledProgram, ExtensionalInterpretation, InterpError};
use crate::models::{check_model, ModelError, ModelVerdict, Relation};
use crate::syntax::{parse_program, Atom, Elem, PredKey, Program, SyntaxError, Term, Universe};


#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SpecError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error(transparent)]
    Interp(#[from] InterpError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("line {line}: {msg}")]
    Unsupported { line: usize, msg: String },
    #[error("{0} is specified twice")]
    Duplicate(String),
    #[error("the specification has no predicate statements")]
    Empty,
    #[error("no fixed point within {0} iterations")]
    Unstable(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Wff {
    True,
    False,
    Atom(Atom),
    Eq(Term, Term),
    Not(Box<Wff>),
    And(Box<Wff>, Box<Wff>),
    Or(Box<Wff>, Box<Wff>),
    Implies(Box<Wff>, Box<Wff>),
    All(Vec<String>, Box<Wff>),
    Ex(Vec<String>, Box<Wff>),
}

impl Wff {
    fn from_term(t: &Term, line: usize, delta: &BTreeSet<PredKey>) -> Result<Wff, SpecError> {
        let bad = |msg: String| SpecError::Unsupported { line, msg };
        let sub = |t: &Term| Wff::from_term(t, line, delta).map(Box::new);
        Ok(match t {
            Term::Var(v) => return Err(bad(format!("variable {} used as a formula", v))),
            Term::App(f, a) => match (f.as_str(), a.len()) {
                ("true", 0) => Wff::True,
                ("false" | "fail", 0) => Wff::False,
                (",", 2) => Wff::And(sub(&a[0])?, sub(&a[1])?),
                (";", 2) => Wff::Or(sub(&a[0])?, sub(&a[1])?),
                ("=>", 2) => Wff::Implies(sub(&a[0])?, sub(&a[1])?),
                ("not" | "\\+", 1) => Wff::Not(sub(&a[0])?),
                ("=", 2) => Wff::Eq(a[0].clone(), a[1].clone()),
                ("\\=", 2) => Wff::Not(Box::new(Wff::Eq(a[0].clone(), a[1].clone()))),
                ("all" | "ex", 2) => {
                    let vars = quantified_vars(&a[0]).ok_or_else(|| bad("quantifier needs a list of variables".into()))?;
                    let body = sub(&a[1])?;
                    if f == "all" {
                        Wff::All(vars, body)
                    } else {
                        Wff::Ex(vars, body)
                    }
                }
                _ => {
                    let atom = Atom::new(f.clone(), a.clone());
                    if !delta.contains(&atom.key()) {
                        return Err(bad(format!("{} is not defined in the specification's clauses", atom.key())));
                    }
                    Wff::Atom(atom)
                }
            },
        })
    }

    fn free_vars_into(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        let mut term_vars = |t: &Term, bound: &Vec<String>| {
            for v in t.vars() {
                if !bound.contains(&v) {
                    out.insert(v);
                }
            }
        };
        match self {
            Wff::True | Wff::False => {}
            Wff::Atom(a) => a.args.iter().for_each(|t| term_vars(t, bound)),
            Wff::Eq(x, y) => {
                term_vars(x, bound);
                term_vars(y, bound);
            }
            Wff::Not(w) => w.free_vars_into(bound, out),
            Wff::And(x, y) | Wff::Or(x, y) | Wff::Implies(x, y) => {
                x.free_vars_into(bound, out);
                y.free_vars_into(bound, out);
            }
            Wff::All(vs, w) | Wff::Ex(vs, w) => {
                let n = bound.len();
                bound.extend(vs.iter().cloned());
                w.free_vars_into(bound, out);
                bound.truncate(n);
            }
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.free_vars_into(&mut Vec::new(), &mut out);
        out
    }
}

fn quantified_vars(t: &Term) -> Option<Vec<String>> {
    let mut out = Vec::new();
    let mut cur = t;
    loop {
        match cur {
            Term::App(n, a) if n == "[]" && a.is_empty() => return Some(out),
            Term::App(n, a) if n == "." && a.len() == 2 => {
                let Term::Var(v) = &a[0] else { return None };
                out.push(v.clone());
                cur = &a[1];
            }
            _ => return None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SpecifiedPredicate {
    pub head: Atom,
    pub pre: Wff,
    pub post: Wff,
    pub line: usize,
}

#[derive(Clone, Debug)]
pub struct Specification {
    pub delta: Program,
    pub specified: Vec<SpecifiedPredicate>,
}

impl Specification {
    pub fn parse(src: &str) -> Result<Specification, SpecError> {
        Specification::from_program(parse_program(src)?)
    }

    pub fn from_program(delta: Program) -> Result<Specification, SpecError> {
        if let Some(c) = delta.clauses.iter().find(|c| c.body.iter().any(|l| l.is_neg())) {
            return Err(SpecError::Unsupported { line: c.line, msg: "the specification's clauses must be definite".into() });
        }
        let defined: BTreeSet<PredKey> = delta.definitions().iter().map(|d| d.key.clone()).collect();
        let mut specified: Vec<SpecifiedPredicate> = Vec::new();
        for s in &delta.specs {
            if specified.iter().any(|o| o.head.key() == s.head.key()) {
                return Err(SpecError::Duplicate(s.head.key().to_string()));
            }
            let pre = s.pre.as_ref().map_or(Ok(Wff::True), |t| Wff::from_term(t, s.line, &defined))?;
            let post = s.post.as_ref().map_or(Ok(Wff::True), |t| Wff::from_term(t, s.line, &defined))?;
            let head_vars: BTreeSet<String> = s.head.vars().into_iter().collect();
            for w in [&pre, &post] {
                if let Some(v) = w.free_vars().difference(&head_vars).next() {
                    return Err(SpecError::Unsupported { line: s.line, msg: format!("{} is free in a condition", v) });
                }
            }
            specified.push(SpecifiedPredicate { head: s.head.clone(), pre, post, line: s.line });
        }
        if specified.is_empty() {
            return Err(SpecError::Empty);
        }
        Ok(Specification { delta, specified })
    }

    pub fn predicates(&self) -> Vec<PredKey> {
        self.specified.iter().map(|s| s.head.key()).collect()
    }
}

/// Δ's least model on a carrier, read classically.
struct Classical {
    carrier: Arc<Universe>,
    model: ExtensionalInterpretation,
}

impl Classical {
    fn new(delta: &Program, carrier: Arc<Universe>) -> Result<Classical, SpecError> {
        let cp = CompiledProgram::new(delta, carrier.clone())?;
        let r = lfp(&cp, DEFAULT_MAX_ITERS)?;
        if !r.stable {
            return Err(SpecError::Unstable(DEFAULT_MAX_ITERS));
        }
        Ok(Classical { carrier, model: r.result })
    }

    fn term(&self, t: &Term, env: &HashMap<String, Elem>) -> Option<Elem> {
        match t {
            Term::Var(v) => env.get(v).copied(),
            Term::App(f, args) => {
                let f = self.carrier.functor_id(f, args.len())?;
                let ids: Option<Vec<Elem>> = args.iter().map(|a| self.term(a, env)).collect();
                self.carrier.app(f, &ids?)
            }
        }
    }

    // Atoms whose arguments fall outside a truncated carrier are false.
    fn holds(&self, w: &Wff, env: &mut HashMap<String, Elem>) -> bool {
        match w {
            Wff::True => true,
            Wff::False => false,
            Wff::Atom(a) => {
                let ids: Option<Vec<Elem>> = a.args.iter().map(|t| self.term(t, env)).collect();
                match (ids, self.model.pred_index(&a.key())) {
                    (Some(ids), Some(p)) => self.model.get(p, &ids) == T,
                    _ => false,
                }
            }
            Wff::Eq(x, y) => match (self.term(x, env), self.term(y, env)) {
                (Some(a), Some(b)) => a == b && !self.carrier.is_overflow(a),
                _ => false,
            },
            Wff::Not(x) => !self.holds(x, env),
            Wff::And(x, y) => self.holds(x, env) && self.holds(y, env),
            Wff::Or(x, y) => self.holds(x, env) || self.holds(y, env),
            Wff::Implies(x, y) => !self.holds(x, env) || self.holds(y, env),
            Wff::All(vs, x) => self.quantify(vs, x, env, true),
            Wff::Ex(vs, x) => self.quantify(vs, x, env, false),
        }
    }

    fn quantify(&self, vs: &[String], body: &Wff, env: &mut HashMap<String, Elem>, all: bool) -> bool {
        let Some((v, rest)) = vs.split_first() else {
            return self.holds(body, env);
        };
        let saved = env.get(v).copied();
        let mut result = all;
        for e in self.carrier.elems() {
            env.insert(v.clone(), e);
            if self.quantify(rest, body, env, all) != all {
                result = !all;
                break;
            }
        }
        match saved {
            Some(e) => env.insert(v.clone(), e),
            None => env.remove(v),
        };
        result
    }
}

/// The four-valued meaning of a specification on a carrier. Only the
/// specified predicates are present.
pub fn spec_meaning(spec: &Specification, carrier: Arc<Universe>) -> Result<ExtensionalInterpretation, SpecError> {
    let delta = Classical::new(&spec.delta, carrier.clone())?;
    meaning_with(spec, &delta)
}

fn meaning_with(spec: &Specification, delta: &Classical) -> Result<ExtensionalInterpretation, SpecError> {
    let preds = spec.predicates();
    let mut out = ExtensionalInterpretation::bottom(delta.carrier.clone(), &preds)?;
    for (pi, s) in spec.specified.iter().enumerate() {
        let vars: Vec<String> = s.head.args.iter().map(|t| t.vars().remove(0)).collect();
        for o in 0..out.table(pi).len() {
            let args = out.args_at(vars.len(), o);
            let mut env: HashMap<String, Elem> = vars.iter().cloned().zip(args.iter().copied()).collect();
            let v = if !delta.holds(&s.pre, &mut env) {
                I
            } else if delta.holds(&s.post, &mut env) {
                T
            } else {
                F
            };
            out.table_mut(pi)[o] = v;
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct Disagreement {
    pub atom: String,
    pub spec: TruthValue4,
    pub lfp: TruthValue4,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpecReport {
    pub depth_bound: usize,
    /// The meaning, completed with Δ's least model, is a ⊒4-model of the
    /// program.
    pub model: ModelVerdict,
    /// The meaning is ⊒ the program's least fixed point on every specified
    /// atom.
    pub refines_lfp: bool,
    pub disagreements: Vec<Disagreement>,
}

impl SpecReport {
    pub fn passes(&self) -> bool {
        self.model.holds && self.refines_lfp
    }
}

const MAX_DISAGREEMENTS: usize = 20;

/// The interpretation used for the model check: specified predicates take
/// the meaning, predicates Δ defines take their classical value, and every
/// other predicate of the program is i.
pub fn completed_meaning(p: &Program, spec: &Specification, carrier: Arc<Universe>) -> Result<ExtensionalInterpretation, SpecError> {
    let delta = Classical::new(&spec.delta, carrier.clone())?;
    let meaning = meaning_with(spec, &delta)?;
    let preds = p.predicates();
    let mut out = ExtensionalInterpretation::filled(carrier, &preds, I)?;
    for (pi, key) in preds.iter().enumerate() {
        if let Some(j) = meaning.pred_index(key) {
            out.table_mut(pi).copy_from_slice(meaning.table(j));
        } else if let Some(j) = delta.model.pred_index(key).filter(|_| spec.delta.definition(key).is_some()) {
            for (dst, v) in out.table_mut(pi).iter_mut().zip(delta.model.table(j)) {
                *dst = if *v == T { T } else { F };
            }
        }
    }
    Ok(out)
}

pub fn check_against_spec(p: &Program, spec: &Specification, carrier: Arc<Universe>) -> Result<SpecReport, SpecError> {
    let full = completed_meaning(p, spec, carrier.clone())?;
    let model = check_model(p, &full, Relation::InfoGeq4)?;
    let cp = CompiledProgram::new(p, carrier.clone())?;
    let least = lfp(&cp, DEFAULT_MAX_ITERS)?;
    if !least.stable {
        return Err(SpecError::Unstable(DEFAULT_MAX_ITERS));
    }
    let mut disagreements = Vec::new();
    let mut refines_lfp = true;
    for key in spec.predicates() {
        let (Some(si), Some(li)) = (full.pred_index(&key), least.result.pred_index(&key)) else {
            continue;
        };
        for (o, (&s, &l)) in full.table(si).iter().zip(least.result.table(li)).enumerate() {
            if !info_leq(l, s) {
                refines_lfp = false;
                if disagreements.len() < MAX_DISAGREEMENTS {
                    disagreements.push(Disagreement { atom: full.atom_at(si, o).to_string(), spec: s, lfp: l });
                }
            }
        }
    }
    Ok(SpecReport { depth_bound: carrier.depth_bound(), model, refines_lfp, disagreements })
}
