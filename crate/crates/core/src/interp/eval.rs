//! Evaluating existentially closed bodies over a carrier.
//!
//! A conjunction is evaluated by search over assignments of its variables:
//! literals whose arguments are bound are folded with `and4`, an equality
//! with one bound side is solved by matching, and otherwise a variable is
//! enumerated over the carrier with the branches joined by `or4`. Branches
//! that make an equality false contribute f, the unit of `or4`, so they can
//! be skipped.

use std::sync::Arc;

use crate::bilattice::{and4, neg4, or4, TruthValue4, F, T, U};
use crate::syntax::{Body, Elem, Literal, PredKey, PredicateDefinition, Program, Term, Universe};

use super::{ExtensionalInterpretation, InterpError};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Val {
    E(Elem),
    /// Outside a truncated carrier.
    Out,
}

#[derive(Clone, Debug)]
enum CTerm {
    Var(usize),
    Ground(Val),
    App(u32, Vec<CTerm>),
}

#[derive(Clone, Debug)]
enum CLit {
    Call { neg: bool, pred: usize, args: Vec<CTerm> },
    Eq { neg: bool, l: CTerm, r: CTerm },
    Error,
}

#[derive(Clone, Debug)]
struct CConj {
    lits: Vec<CLit>,
    nvars: usize,
}

#[derive(Clone, Debug)]
struct CDef {
    arity: usize,
    disjuncts: Vec<CConj>,
}

/// A program's definitions compiled against a carrier and a predicate
/// numbering. Interpretations evaluated with it must use the same numbering,
/// see [`CompiledProgram::bottom`] and [`ExtensionalInterpretation::aligned`].
#[derive(Clone, Debug)]
pub struct CompiledProgram {
    carrier: Arc<Universe>,
    preds: Vec<PredKey>,
    defs: Vec<Option<CDef>>,
    negation: bool,
}

struct Compiler<'a> {
    carrier: &'a Universe,
    preds: &'a [PredKey],
}

impl<'a> Compiler<'a> {
    fn term(&self, t: &Term, vars: &mut Vec<String>) -> Result<CTerm, InterpError> {
        if t.is_ground() {
            return Ok(CTerm::Ground(self.ground(t)?));
        }
        match t {
            Term::Var(v) => Ok(CTerm::Var(slot(vars, v))),
            Term::App(f, args) => {
                let id = self
                    .carrier
                    .functor_id(f, args.len())
                    .ok_or_else(|| InterpError::UnknownFunctor(format!("{}/{}", f, args.len())))?;
                let args = args.iter().map(|a| self.term(a, vars)).collect::<Result<_, _>>()?;
                Ok(CTerm::App(id, args))
            }
        }
    }

    fn ground(&self, t: &Term) -> Result<Val, InterpError> {
        let Term::App(f, args) = t else { unreachable!() };
        if f == crate::syntax::DEEP && args.is_empty() {
            return self.carrier.overflow_elem().map(Val::E).ok_or_else(|| InterpError::OutsideCarrier(t.to_string()));
        }
        let id = self
            .carrier
            .functor_id(f, args.len())
            .ok_or_else(|| InterpError::UnknownFunctor(format!("{}/{}", f, args.len())))?;
        let mut ids = Vec::with_capacity(args.len());
        for a in args {
            match self.ground(a)? {
                Val::E(e) => ids.push(e),
                Val::Out => return Ok(Val::Out),
            }
        }
        Ok(self.carrier.app(id, &ids).map_or(Val::Out, Val::E))
    }

    fn lit(&self, l: &Literal, vars: &mut Vec<String>) -> Result<CLit, InterpError> {
        let a = l.atom();
        if a.is_error() {
            return Ok(CLit::Error);
        }
        if a.is_eq() {
            return Ok(CLit::Eq { neg: l.is_neg(), l: self.term(&a.args[0], vars)?, r: self.term(&a.args[1], vars)? });
        }
        let key = a.key();
        let pred = self.preds.iter().position(|p| *p == key).ok_or_else(|| InterpError::UnknownPredicate(key.to_string()))?;
        let args = a.args.iter().map(|t| self.term(t, vars)).collect::<Result<_, _>>()?;
        Ok(CLit::Call { neg: l.is_neg(), pred, args })
    }

    fn conj(&self, lits: &[Literal], vars: &[String]) -> Result<CConj, InterpError> {
        let mut vars = vars.to_vec();
        if lits.len() > 64 {
            return Err(InterpError::Format { line: 0, msg: "conjunction longer than 64 literals".into() });
        }
        let lits = lits.iter().map(|l| self.lit(l, &mut vars)).collect::<Result<_, _>>()?;
        Ok(CConj { lits, nvars: vars.len() })
    }

    fn def(&self, d: &PredicateDefinition) -> Result<CDef, InterpError> {
        let disjuncts = d.disjuncts.iter().map(|dj| self.conj(&dj.literals, &d.head_vars)).collect::<Result<_, _>>()?;
        Ok(CDef { arity: d.key.arity, disjuncts })
    }
}

fn slot(vars: &mut Vec<String>, v: &str) -> usize {
    vars.iter().position(|x| x == v).unwrap_or_else(|| {
        vars.push(v.to_string());
        vars.len() - 1
    })
}

impl CompiledProgram {
    pub fn new(p: &Program, carrier: Arc<Universe>) -> Result<CompiledProgram, InterpError> {
        Self::with_preds(p, carrier, &p.predicates())
    }

    /// Compile with an explicit predicate numbering, which must include every
    /// predicate of the program.
    pub fn with_preds(p: &Program, carrier: Arc<Universe>, preds: &[PredKey]) -> Result<CompiledProgram, InterpError> {
        let c = Compiler { carrier: &carrier, preds };
        let mut defs = vec![None; preds.len()];
        for d in p.definitions() {
            let i = preds.iter().position(|k| *k == d.key).ok_or_else(|| InterpError::UnknownPredicate(d.key.to_string()))?;
            defs[i] = Some(c.def(d)?);
        }
        Ok(CompiledProgram { carrier: carrier.clone(), preds: preds.to_vec(), defs, negation: p.has_negation() })
    }

    pub fn carrier(&self) -> &Arc<Universe> {
        &self.carrier
    }

    pub fn preds(&self) -> &[PredKey] {
        &self.preds
    }

    pub fn has_negation(&self) -> bool {
        self.negation
    }

    pub fn is_defined(&self, pred: usize) -> bool {
        self.defs[pred].is_some()
    }

    pub fn bottom(&self) -> Result<ExtensionalInterpretation, InterpError> {
        ExtensionalInterpretation::bottom(self.carrier.clone(), &self.preds)
    }

    /// Value of the body of the head grounding at `args`. Predicates without
    /// clauses have the empty body, which is f.
    pub fn head_value(&self, i: &ExtensionalInterpretation, pred: usize, args: &[Elem]) -> TruthValue4 {
        let Some(def) = &self.defs[pred] else { return F };
        debug_assert_eq!(def.arity, args.len());
        let mut acc = F;
        for c in &def.disjuncts {
            let mut env: Vec<Option<Elem>> = vec![None; c.nvars];
            for (k, &a) in args.iter().enumerate() {
                env[k] = Some(a);
            }
            acc = or4(acc, self.search(i, &c.lits, &mut env, 0, T));
            if acc == T {
                break;
            }
        }
        acc
    }

    /// Value of each disjunct of the head grounding at `args`, in clause order.
    pub fn disjunct_values(&self, i: &ExtensionalInterpretation, pred: usize, args: &[Elem]) -> Vec<TruthValue4> {
        let Some(def) = &self.defs[pred] else { return Vec::new() };
        def.disjuncts
            .iter()
            .map(|c| {
                let mut env: Vec<Option<Elem>> = vec![None; c.nvars];
                for (k, &a) in args.iter().enumerate() {
                    env[k] = Some(a);
                }
                self.search(i, &c.lits, &mut env, 0, T)
            })
            .collect()
    }

    fn eval(&self, t: &CTerm, env: &[Option<Elem>]) -> Option<Val> {
        match t {
            CTerm::Var(v) => env[*v].map(Val::E),
            CTerm::Ground(g) => Some(*g),
            CTerm::App(f, args) => {
                let mut ids = [0 as Elem; 8];
                let mut big = Vec::new();
                let buf: &mut [Elem] = if args.len() <= 8 {
                    &mut ids[..args.len()]
                } else {
                    big.resize(args.len(), 0);
                    &mut big
                };
                for (k, a) in args.iter().enumerate() {
                    match self.eval(a, env)? {
                        Val::E(e) => buf[k] = e,
                        Val::Out => return Some(Val::Out),
                    }
                }
                Some(self.carrier.app(*f, buf).map_or(Val::Out, Val::E))
            }
        }
    }

    fn lit_value(&self, i: &ExtensionalInterpretation, l: &CLit, env: &[Option<Elem>]) -> Option<TruthValue4> {
        match l {
            CLit::Error => Some(U),
            CLit::Eq { neg, l, r } => {
                let v = match (self.eval(l, env)?, self.eval(r, env)?) {
                    (Val::E(a), Val::E(b)) => {
                        if a == b {
                            T
                        } else {
                            F
                        }
                    }
                    (Val::Out, Val::Out) => U,
                    _ => F,
                };
                Some(if *neg { neg4(v) } else { v })
            }
            CLit::Call { neg, pred, args } => {
                let n = self.carrier.len();
                let mut off = 0usize;
                let mut out = false;
                for a in args {
                    match self.eval(a, env)? {
                        Val::E(e) => off = off * n + e as usize,
                        Val::Out => out = true,
                    }
                }
                let v = if out { U } else { i.table(*pred)[off] };
                Some(if *neg { neg4(v) } else { v })
            }
        }
    }

    /// `or4` over all extensions of `env` of `and4(acc, remaining literals)`.
    fn search(
        &self,
        i: &ExtensionalInterpretation,
        lits: &[CLit],
        env: &mut Vec<Option<Elem>>,
        done: u64,
        acc: TruthValue4,
    ) -> TruthValue4 {
        let mut done = done;
        let mut acc = acc;
        for (k, l) in lits.iter().enumerate() {
            if done & (1 << k) != 0 {
                continue;
            }
            if let Some(v) = self.lit_value(i, l, env) {
                acc = and4(acc, v);
                done |= 1 << k;
                if acc == F {
                    return F;
                }
            }
        }
        if done.count_ones() as usize == lits.len() {
            return acc;
        }
        // an equality with one evaluable side fixes its other side
        for (k, l) in lits.iter().enumerate() {
            if done & (1 << k) != 0 {
                continue;
            }
            let CLit::Eq { neg: false, l, r } = l else { continue };
            let (g, pat) = match (self.eval(l, env), self.eval(r, env)) {
                (Some(g), None) => (g, r),
                (None, Some(g)) => (g, l),
                _ => continue,
            };
            let Val::E(g) = g else { continue };
            if self.carrier.is_overflow(g) && !matches!(pat, CTerm::Var(_)) {
                continue;
            }
            let mut bound = Vec::new();
            let r = if self.matches(pat, g, env, &mut bound) { self.search(i, lits, env, done | (1 << k), acc) } else { F };
            for v in bound {
                env[v] = None;
            }
            return r;
        }
        let v = self.pick_var(lits, env, done).expect("an unfinished literal has an unbound variable");
        let mut result = F;
        for e in self.carrier.elems() {
            env[v] = Some(e);
            result = or4(result, self.search(i, lits, env, done, acc));
            if result == T {
                break;
            }
        }
        env[v] = None;
        result
    }

    /// Bind the variables of `pat` so that it denotes the standard element
    /// `g`. Returns false when no assignment does.
    fn matches(&self, pat: &CTerm, g: Elem, env: &mut [Option<Elem>], bound: &mut Vec<usize>) -> bool {
        match pat {
            CTerm::Var(v) => match env[*v] {
                Some(e) => e == g,
                None => {
                    env[*v] = Some(g);
                    bound.push(*v);
                    true
                }
            },
            CTerm::Ground(Val::E(e)) => *e == g,
            CTerm::Ground(Val::Out) => false,
            CTerm::App(f, args) => match self.carrier.decompose(g) {
                Some((h, sub)) if h == *f => {
                    let sub = sub.to_vec();
                    args.iter().zip(sub).all(|(a, s)| self.matches(a, s, env, bound))
                }
                _ => false,
            },
        }
    }

    fn pick_var(&self, lits: &[CLit], env: &[Option<Elem>], done: u64) -> Option<usize> {
        fn first(t: &CTerm, env: &[Option<Elem>]) -> Option<usize> {
            match t {
                CTerm::Var(v) => env[*v].is_none().then_some(*v),
                CTerm::Ground(_) => None,
                CTerm::App(_, args) => args.iter().find_map(|a| first(a, env)),
            }
        }
        lits.iter().enumerate().filter(|(k, _)| done & (1 << k) == 0).find_map(|(_, l)| match l {
            CLit::Call { args, .. } => args.iter().find_map(|a| first(a, env)),
            CLit::Eq { l, r, .. } => first(l, env).or_else(|| first(r, env)),
            CLit::Error => None,
        })
    }

    /// Evaluate a ground body instance, such as one produced by
    /// [`crate::syntax::head_grounding`]; only its local variables may be free.
    pub fn eval_body(&self, i: &ExtensionalInterpretation, body: &Body) -> Result<TruthValue4, InterpError> {
        let c = Compiler { carrier: &self.carrier, preds: &self.preds };
        let mut acc = F;
        for d in &body.disjuncts {
            let mut vars = Vec::new();
            for l in d {
                for v in l.atom().vars() {
                    if !body.locals.contains(&v) {
                        return Err(InterpError::NotGround(l.to_string()));
                    }
                    if !vars.contains(&v) {
                        vars.push(v);
                    }
                }
            }
            let conj = c.conj(d, &[])?;
            let mut env = vec![None; conj.nvars];
            acc = or4(acc, self.search(i, &conj.lits, &mut env, 0, T));
        }
        Ok(acc)
    }
}

/// Value of a ground body instance under `i`, over the carrier of `i`.
pub fn eval_body(p: &Program, i: &ExtensionalInterpretation, body: &Body) -> Result<TruthValue4, InterpError> {
    let mut preds = i.preds().to_vec();
    for k in p.predicates() {
        if !preds.contains(&k) {
            preds.push(k);
        }
    }
    let aligned = i.aligned(&preds)?;
    let cp = CompiledProgram::with_preds(p, i.carrier().clone(), &preds)?;
    cp.eval_body(&aligned, body)
}
