//! Depth-k analysis: a bottom-up approximation of Φ_P over possibly
//! non-ground atoms whose arguments are pruned to depth k.
//!
//! The true component collects pruned heads of clause instances whose body
//! atoms unify with known true atoms. The false component is computed over
//! candidate patterns, the prunings of ground atoms: a pattern stays false
//! unless some clause head generalizes it and no literal of the instantiated
//! body unifies with a known false pattern. A non-ground atom stands for all
//! its ground instances, and an atom covered by both components is i.

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use crate::bilattice::TruthValue4;
use crate::interp::ExtensionalInterpretation;
use crate::syntax::{
    canonical_variant, generalizes, match_atom, mgu, prune, Atom, Fresh, Literal, PredKey, Program, Substitution, Term,
    Universe,
};

use super::EngineError;

const MAX_PATTERNS: usize = 200_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbstractInterpretation {
    pub true_atoms: Vec<Atom>,
    pub false_atoms: Vec<Atom>,
    pub k: usize,
    pub iterations: usize,
}

impl AbstractInterpretation {
    /// Four-valued reading of one ground atom.
    pub fn value_of(&self, a: &Atom) -> TruthValue4 {
        let t = self.true_atoms.iter().any(|p| generalizes(p, a));
        let f = self.false_atoms.iter().any(|p| generalizes(p, a));
        TruthValue4::from_pair(f, t)
    }
}

impl fmt::Display for AbstractInterpretation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |atoms: &[Atom]| {
            let mut v: Vec<String> = atoms.iter().map(|a| a.to_string()).collect();
            v.sort_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b)));
            v.join(", ")
        };
        writeln!(f, "true:  {{{}}}", show(&self.true_atoms))?;
        writeln!(f, "false: {{{}}}", show(&self.false_atoms))
    }
}

/// A clause with body equalities solved and only ordinary body atoms left.
/// `None` in the body marks an error/1 call, which is neither true nor false.
struct Normal {
    head: Atom,
    body: Vec<Option<Atom>>,
}

fn normalize(p: &Program) -> Result<Vec<Normal>, EngineError> {
    let mut out = Vec::new();
    'clauses: for c in &p.clauses {
        let mut s = Substitution::new();
        let mut body = Vec::new();
        for l in &c.body {
            match l {
                Literal::Neg(_) => return Err(EngineError::Negation),
                Literal::Pos(a) if a.is_eq() => {
                    if !s.unify(&a.args[0], &a.args[1]) {
                        continue 'clauses;
                    }
                }
                Literal::Pos(a) => body.push(a.clone()),
            }
        }
        out.push(Normal {
            head: c.head.apply(&s),
            body: body.into_iter().map(|a| (!a.is_error()).then(|| a.apply(&s))).collect(),
        });
    }
    Ok(out)
}

struct Renamer(usize);

impl Renamer {
    fn atom(&mut self, a: &Atom) -> Atom {
        self.0 += 1;
        let n = self.0;
        a.rename(&mut |v| format!("{}_{}", v, n))
    }

    fn clause(&mut self, c: &Normal) -> Normal {
        self.0 += 1;
        let n = self.0;
        let mut r = |v: &str| format!("{}_c{}", v, n);
        Normal {
            head: c.head.rename(&mut r),
            body: c.body.iter().map(|b| b.as_ref().map(|a| a.rename(&mut r))).collect(),
        }
    }
}

fn prune_atom(a: &Atom, k: usize) -> Atom {
    let mut fresh = Fresh::new("P");
    canonical_variant(&Atom::new(a.pred.clone(), a.args.iter().map(|t| prune(t, k, &mut fresh)).collect()))
}

/// Pruned ground terms: depth at most k, with a variable wherever a compound
/// term would start at depth k.
fn pruned_terms(alphabet: &[(String, usize)], k: usize) -> Vec<Term> {
    let consts: Vec<Term> = alphabet.iter().filter(|(_, a)| *a == 0).map(|(n, _)| Term::constant(n.clone())).collect();
    let has_compound = alphabet.iter().any(|(_, a)| *a > 0);
    let mut level: Vec<Term> = consts.clone();
    if has_compound {
        level.push(Term::var("_"));
    }
    for _ in 1..k {
        let mut next = consts.clone();
        for (f, ar) in alphabet.iter().filter(|(_, a)| *a > 0) {
            let mut tuples: Vec<Vec<Term>> = vec![vec![]];
            for _ in 0..*ar {
                tuples = tuples.into_iter().flat_map(|t| level.iter().map(move |x| [t.clone(), vec![x.clone()]].concat())).collect();
                if tuples.len() > MAX_PATTERNS {
                    return tuples.into_iter().map(|a| Term::app(f.clone(), a)).collect();
                }
            }
            next.extend(tuples.into_iter().map(|a| Term::app(f.clone(), a)));
        }
        level = next;
    }
    level
}

fn candidates(key: &PredKey, terms: &[Term]) -> Result<Vec<Atom>, EngineError> {
    let size = terms.len().checked_pow(key.arity as u32).filter(|&n| n <= MAX_PATTERNS);
    if size.is_none() || terms.len() > MAX_PATTERNS {
        return Err(EngineError::TooManyPatterns(MAX_PATTERNS, key.to_string()));
    }
    let mut tuples: Vec<Vec<Term>> = vec![vec![]];
    for _ in 0..key.arity {
        tuples = tuples.into_iter().flat_map(|t| terms.iter().map(move |x| [t.clone(), vec![x.clone()]].concat())).collect();
    }
    Ok(tuples.into_iter().map(|args| {
        let mut n = 0;
        let a = Atom::new(key.name.clone(), args).rename(&mut |_| {
            n += 1;
            format!("_P{}", n)
        });
        canonical_variant(&a)
    }).collect())
}

fn join(
    body: &[Option<Atom>],
    s: Substitution,
    facts: &[Atom],
    ren: &mut Renamer,
    out: &mut Vec<Substitution>,
) {
    let Some((first, rest)) = body.split_first() else {
        out.push(s);
        return;
    };
    let Some(goal) = first else { return };
    let goal = goal.apply(&s);
    for f in facts.iter().filter(|f| f.pred == goal.pred && f.args.len() == goal.args.len()) {
        let f = ren.atom(f);
        let mut s2 = s.clone();
        if s2.unify_atoms(&goal, &f) {
            join(rest, s2, facts, ren, out);
        }
    }
}

/// Depth-k analysis of a negation-free program.
pub fn analyze_depthk(p: &Program, k: usize) -> Result<AbstractInterpretation, EngineError> {
    if k == 0 {
        return Err(EngineError::ZeroDepth);
    }
    let clauses = normalize(p)?;
    let mut ren = Renamer(0);
    let mut iterations = 0;

    let mut t_atoms: Vec<Atom> = Vec::new();
    let mut t_seen: HashSet<Atom> = HashSet::new();
    loop {
        let mut added = false;
        let snapshot = t_atoms.clone();
        for c in &clauses {
            let c = ren.clause(c);
            let mut sols = Vec::new();
            join(&c.body, Substitution::new(), &snapshot, &mut ren, &mut sols);
            for s in sols {
                let h = prune_atom(&c.head.apply(&s), k);
                if t_seen.insert(h.clone()) {
                    t_atoms.push(h);
                    added = true;
                }
            }
        }
        iterations += 1;
        if !added {
            break;
        }
    }

    let alphabet: Vec<(String, usize)> = p.alphabet().into_iter().collect();
    let terms = pruned_terms(&alphabet, k);
    let mut cands = Vec::new();
    for key in p.predicates() {
        cands.extend(candidates(&key, &terms)?);
    }
    let mut f_atoms: Vec<Atom> = Vec::new();
    loop {
        let next: Vec<Atom> = cands.iter().filter(|c| !excluded(c, &clauses, &f_atoms, &mut ren)).cloned().collect();
        iterations += 1;
        if next.len() == f_atoms.len() {
            break;
        }
        f_atoms = next;
    }
    Ok(AbstractInterpretation { true_atoms: t_atoms, false_atoms: f_atoms, k, iterations })
}

fn excluded(pattern: &Atom, clauses: &[Normal], falses: &[Atom], ren: &mut Renamer) -> bool {
    clauses.iter().any(|c| {
        if c.head.pred != pattern.pred || c.head.args.len() != pattern.args.len() {
            return false;
        }
        let c = ren.clause(c);
        let Some(s) = match_atom(&c.head, pattern) else { return false };
        c.body.iter().all(|b| match b {
            None => true,
            Some(b) => {
                let b = b.apply(&s);
                !falses.iter().any(|f| f.pred == b.pred && mgu(&b, &ren.atom(f)).is_some())
            }
        })
    })
}

/// Ground reading over a carrier: an atom is t, f, i or u according to which
/// components have a generalizing member.
pub fn concretize(
    a: &AbstractInterpretation,
    carrier: Arc<Universe>,
    preds: &[PredKey],
) -> Result<ExtensionalInterpretation, EngineError> {
    let mut out = ExtensionalInterpretation::bottom(carrier, preds)?;
    for p in 0..preds.len() {
        for o in 0..out.table(p).len() {
            let atom = out.atom_at(p, o);
            out.table_mut(p)[o] = a.value_of(&atom);
        }
    }
    Ok(out)
}
