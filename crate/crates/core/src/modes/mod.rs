//! Mode interpretations and well-modedness.
//!
//! A mode interpretation gives a ground atom u for error/1, t when every
//! argument is well typed, i when some input is ill typed and f otherwise.
//! A group of modes takes the pointwise meet.
//!
//! Well-modedness is checked on clauses abstractly. Each head variable is
//! taken to be well typed (W) or ill typed (I). Local variables start free;
//! a call that binds one branches on its typedness, and a mode with a free
//! input gives i. Body goals may run in any order, so an abstract head
//! instance is fine when some order gives a body value ⊑ the head value.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::Serialize;

use crate::bilattice::{and4, info_leq, meet_all, neg4, or4, TruthValue4, F, I, T, U};
use crate::interp::{InterpError, InterpretationView};
use crate::syntax::{Atom, Clause, Declarations, Literal, Mode, PredKey, Program, Term, TypeExpr, Universe};

#[cfg(test)]
mod tests;

const MAX_ASSIGNMENTS: usize = 1 << 12;
const MAX_HEAD_VARS: usize = 16;
const MAX_REORDER: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModeError {
    #[error("{0} has no pred declaration")]
    NoPredDecl(String),
    #[error("{0} has no mode declaration")]
    NoModeDecl(String),
    #[error("unknown type {1} in the declaration of {0}")]
    UnknownType(String, String),
    #[error("{0} of arity {1} does not match its declaration")]
    Arity(String, usize),
    #[error("{0} candidate assignments; split the program")]
    TooManyAssignments(usize),
    #[error("clause at line {0} has more than {MAX_HEAD_VARS} head variables")]
    TooManyVars(usize),
    #[error(transparent)]
    Interp(#[from] InterpError),
}

/// Per-argument well-typedness of a ground atom.
pub fn well_typed(a: &Atom, decls: &Declarations) -> Result<Vec<bool>, ModeError> {
    let d = decls.pred_decl(&a.key()).ok_or_else(|| ModeError::NoPredDecl(a.key().to_string()))?;
    Ok(a.args.iter().zip(&d.arg_types).map(|(t, ty)| decls.has_type(t, ty)).collect())
}

/// Value of an atom with the given argument typedness under one mode.
pub fn mode_value(well: &[bool], m: &Mode) -> TruthValue4 {
    if well.iter().all(|&w| w) {
        T
    } else if (0..well.len()).any(|j| m.is_input(j) && !well[j]) {
        I
    } else {
        F
    }
}

/// Ground mode interpretation over the predicates it has modes for.
#[derive(Clone, Debug)]
pub struct ModeInterpretation {
    modes: BTreeMap<PredKey, Vec<Mode>>,
    decls: Declarations,
}

impl ModeInterpretation {
    pub fn new(modes: BTreeMap<PredKey, Vec<Mode>>, decls: &Declarations) -> Self {
        ModeInterpretation { modes, decls: decls.clone() }
    }

    pub fn modes(&self) -> &BTreeMap<PredKey, Vec<Mode>> {
        &self.modes
    }

    /// Pointwise meet: the union of the modes.
    pub fn meet(&self, other: &ModeInterpretation) -> ModeInterpretation {
        let mut modes = self.modes.clone();
        for (k, ms) in &other.modes {
            let e = modes.entry(k.clone()).or_default();
            for m in ms {
                if !e.contains(m) {
                    e.push(m.clone());
                }
            }
        }
        ModeInterpretation { modes, decls: self.decls.clone() }
    }
}

impl InterpretationView for ModeInterpretation {
    fn lookup(&self, a: &Atom) -> Result<TruthValue4, InterpError> {
        if a.is_error() {
            return Ok(U);
        }
        let modes = self.modes.get(&a.key()).ok_or_else(|| InterpError::UnknownPredicate(a.key().to_string()))?;
        let well = well_typed(a, &self.decls).map_err(|e| InterpError::UnknownPredicate(e.to_string()))?;
        Ok(meet_all(modes.iter().map(|m| mode_value(&well, m))))
    }
}

pub fn mode_interpretation(pred: &PredKey, m: &Mode, decls: &Declarations) -> ModeInterpretation {
    ModeInterpretation::new(BTreeMap::from([(pred.clone(), vec![m.clone()])]), decls)
}

pub fn group_interpretation(pred: &PredKey, modes: &[Mode], decls: &Declarations) -> ModeInterpretation {
    ModeInterpretation::new(BTreeMap::from([(pred.clone(), modes.to_vec())]), decls)
}

/// Atoms whose inputs are well typed for the modes (value t or f) but which
/// the intended interpretation calls inadmissible. Mode checking lets such
/// atoms be called, so it cannot clear them statically.
pub fn check_intended_against_modes(
    mi: &ModeInterpretation,
    intended: &dyn InterpretationView,
    carrier: &Universe,
    preds: &[PredKey],
) -> Result<Vec<Atom>, InterpError> {
    let mut out = Vec::new();
    for key in preds {
        let n = carrier.atom_count(key.arity).ok_or(InterpError::TooLarge { pred: key.to_string(), limit: usize::MAX })?;
        let len = carrier.len();
        for mut o in 0..n {
            let mut args = vec![Term::nil(); key.arity];
            for slot in args.iter_mut().rev() {
                *slot = carrier.term_of((o % len) as _);
                o /= len;
            }
            let a = Atom::new(key.name.clone(), args);
            let m = mi.value_of(&a)?;
            if (m == T || m == F) && intended.value_of(&a)? == I {
                out.push(a);
            }
        }
    }
    Ok(out)
}

/// Abstract state of a clause variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum State {
    W,
    I,
    Free,
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            State::W => "W",
            State::I => "I",
            State::Free => "free",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    /// Body not ⊑ head.
    NotGeq4,
    /// A negated literal with a free argument.
    FreeNegation,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ModeViolation {
    pub pred: String,
    pub line: usize,
    /// Head variable states for this abstract instance.
    pub instance: String,
    pub head: TruthValue4,
    pub body: TruthValue4,
    pub kind: ViolationKind,
}

impl fmt::Display for ModeViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ViolationKind::NotGeq4 => write!(
                f,
                "{} clause at line {}: head {} body {} when {}",
                self.pred, self.line, self.head, self.body, self.instance
            ),
            ViolationKind::FreeNegation => {
                write!(f, "{} clause at line {}: negated literal with a free argument when {}", self.pred, self.line, self.instance)
            }
        }
    }
}

struct Checker<'a> {
    decls: &'a Declarations,
    modes: &'a BTreeMap<PredKey, Vec<Mode>>,
}

fn arg_types<'a>(decls: &'a Declarations, key: &PredKey) -> Result<&'a [TypeExpr], ModeError> {
    let d = decls.pred_decl(key).ok_or_else(|| ModeError::NoPredDecl(key.to_string()))?;
    if d.arg_types.len() != key.arity {
        return Err(ModeError::Arity(key.name.clone(), key.arity));
    }
    Ok(&d.arg_types)
}

fn has_free(t: &Term, env: &HashMap<String, State>) -> bool {
    t.vars().iter().any(|v| env.get(v).copied().unwrap_or(State::Free) == State::Free)
}

impl<'a> Checker<'a> {
    fn term_state(&self, t: &Term, ty: &TypeExpr, env: &HashMap<String, State>) -> State {
        if has_free(t, env) {
            return State::Free;
        }
        match (t, ty) {
            (_, TypeExpr::Var(_)) => State::W,
            (Term::Var(v), _) => env[v],
            (Term::App(f, args), TypeExpr::Con(name, targs)) => {
                let Some(decl) = self.decls.resolve_type(name, targs.len()) else { return State::I };
                let Some((_, cargs)) = decl.constructors.iter().find(|(c, ca)| c == f && ca.len() == args.len()) else {
                    return State::I;
                };
                let env_t: HashMap<&str, &TypeExpr> = decl.params.iter().map(String::as_str).zip(targs).collect();
                let any_ill = cargs.iter().zip(args).any(|(cty, a)| self.term_state(a, &subst(cty, &env_t), env) == State::I);
                if any_ill {
                    State::I
                } else {
                    State::W
                }
            }
        }
    }

    /// Meet over the callee's modes. A mode whose input was free before the
    /// call gives i; otherwise its value follows from the typedness after.
    fn call_value(&self, key: &PredKey, before: &[State], after: &[State]) -> TruthValue4 {
        let per_mode = |m: &Mode| {
            if (0..before.len()).any(|j| m.is_input(j) && before[j] != State::W) {
                I
            } else if after.contains(&State::I) {
                F
            } else {
                T
            }
        };
        meet_all(self.modes[key].iter().map(per_mode))
    }

    fn arg_states(&self, a: &Atom, env: &HashMap<String, State>) -> Result<Vec<State>, ModeError> {
        let tys = arg_types(self.decls, &a.key())?;
        Ok(a.args.iter().zip(tys).map(|(t, ty)| self.term_state(t, ty, env)).collect())
    }

    /// Value of the literals `order[k..]` under `env`, existentially
    /// branching on the typedness of each variable a call binds.
    fn eval_from(&self, lits: &[&Literal], env: &mut HashMap<String, State>, free_neg: &mut bool) -> Result<TruthValue4, ModeError> {
        let Some((l, rest)) = lits.split_first() else { return Ok(T) };
        let a = l.atom();
        if a.is_error() {
            return Ok(and4(U, self.eval_from(rest, env, free_neg)?));
        }
        if a.is_eq() {
            let saved = env.clone();
            bind_eq(&a.args[0], &a.args[1], env);
            let v = self.eval_from(rest, env, free_neg)?;
            *env = saved;
            return Ok(v);
        }
        let tys = arg_types(self.decls, &a.key())?;
        let mut fresh: Vec<String> = a.vars().into_iter().filter(|v| !env.contains_key(v)).collect();
        fresh.sort();
        fresh.dedup();
        if l.is_neg() {
            if !fresh.is_empty() {
                *free_neg = true;
            }
            let states: Vec<State> = a.args.iter().zip(tys).map(|(t, ty)| self.term_state(t, ty, env)).collect();
            let v = neg4(self.call_value(&a.key(), &states, &states));
            return Ok(and4(v, self.eval_from(rest, env, free_neg)?));
        }
        let before: Vec<State> = a.args.iter().zip(tys).map(|(t, ty)| self.term_state(t, ty, env)).collect();
        let mut acc = F;
        for bits in 0..(1usize << fresh.len()) {
            for (j, v) in fresh.iter().enumerate() {
                env.insert(v.clone(), if bits >> j & 1 == 1 { State::I } else { State::W });
            }
            let after: Vec<State> = a.args.iter().zip(tys).map(|(t, ty)| self.term_state(t, ty, env)).collect();
            let v = self.call_value(&a.key(), &before, &after);
            let rest_v = if v == F { F } else { self.eval_from(rest, env, free_neg)? };
            acc = or4(acc, and4(v, rest_v));
        }
        for v in &fresh {
            env.remove(v);
        }
        Ok(acc)
    }

    fn check_clause(&self, c: &Clause, out: &mut Vec<ModeViolation>) -> Result<(), ModeError> {
        let key = c.head.key();
        let tys = arg_types(self.decls, &key)?;
        let mut head_vars = c.head.vars();
        head_vars.sort();
        head_vars.dedup();
        if head_vars.len() > MAX_HEAD_VARS {
            return Err(ModeError::TooManyVars(c.line));
        }
        // A variable at a type-variable position cannot be ill typed.
        let universal: BTreeSet<String> = c
            .head
            .args
            .iter()
            .zip(tys)
            .flat_map(|(t, ty)| universal_vars(self.decls, t, ty))
            .collect();
        let orders = schedules(c.body.len());
        for bits in 0..(1usize << head_vars.len()) {
            let mut env: HashMap<String, State> = HashMap::new();
            let mut possible = true;
            for (j, v) in head_vars.iter().enumerate() {
                let s = if bits >> j & 1 == 1 { State::I } else { State::W };
                possible &= !(s == State::I && universal.contains(v));
                env.insert(v.clone(), s);
            }
            if !possible {
                continue;
            }
            let head_states = self.arg_states(&c.head, &env)?;
            let head = self.call_value(&key, &head_states, &head_states);
            let instance = head_vars.iter().map(|v| format!("{}={}", v, env[v])).collect::<Vec<_>>().join(", ");
            let mut first = None;
            let mut ok = false;
            let mut free_neg = false;
            for order in &orders {
                let lits: Vec<&Literal> = order.iter().map(|&k| &c.body[k]).collect();
                let mut fneg = false;
                let body = self.eval_from(&lits, &mut env.clone(), &mut fneg)?;
                first.get_or_insert((body, fneg));
                if info_leq(body, head) && !fneg {
                    ok = true;
                    break;
                }
                free_neg |= fneg;
            }
            if !ok {
                let (body, fneg) = first.expect("at least one order");
                let kind = if fneg || free_neg { ViolationKind::FreeNegation } else { ViolationKind::NotGeq4 };
                out.push(ModeViolation { pred: key.to_string(), line: c.line, instance, head, body, kind });
            }
        }
        Ok(())
    }
}

/// Orders in which a body may be run: every permutation for short bodies,
/// the source order otherwise.
fn schedules(n: usize) -> Vec<Vec<usize>> {
    if n > MAX_REORDER {
        return vec![(0..n).collect()];
    }
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    permute(&mut cur, 0, &mut out);
    out
}

fn permute(v: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k == v.len() {
        out.push(v.clone());
        return;
    }
    for j in k..v.len() {
        v.swap(k, j);
        permute(v, k + 1, out);
        v.swap(k, j);
    }
}

fn bind_eq(a: &Term, b: &Term, env: &mut HashMap<String, State>) {
    let free = |t: &Term, env: &HashMap<String, State>| has_free(t, env);
    for (x, y) in [(a, b), (b, a)] {
        if let Term::Var(v) = x {
            if free(x, env) && !free(y, env) {
                let s = if y.vars().iter().all(|w| env[w] == State::W) { State::W } else { State::I };
                env.insert(v.clone(), s);
                return;
            }
        }
    }
}

fn universal_vars(decls: &Declarations, t: &Term, ty: &TypeExpr) -> Vec<String> {
    match (t, ty) {
        (_, TypeExpr::Var(_)) => t.vars(),
        (Term::Var(_), _) => vec![],
        (Term::App(f, args), TypeExpr::Con(name, targs)) => {
            let Some(decl) = decls.resolve_type(name, targs.len()) else { return vec![] };
            let Some((_, cargs)) = decl.constructors.iter().find(|(c, ca)| c == f && ca.len() == args.len()) else {
                return vec![];
            };
            let env: HashMap<&str, &TypeExpr> = decl.params.iter().map(String::as_str).zip(targs).collect();
            cargs.iter().zip(args).flat_map(|(cty, a)| universal_vars(decls, a, &subst(cty, &env))).collect()
        }
    }
}

fn subst(ty: &TypeExpr, env: &HashMap<&str, &TypeExpr>) -> TypeExpr {
    match ty {
        TypeExpr::Var(v) => env.get(v.as_str()).map_or_else(|| ty.clone(), |t| (*t).clone()),
        TypeExpr::Con(n, args) => TypeExpr::Con(n.clone(), args.iter().map(|a| subst(a, env)).collect()),
    }
}

/// The interpretation chosen for one predicate: one of its groups, or the
/// meet of all of them.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Choice {
    Group(usize),
    Meet,
}

impl fmt::Display for Choice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Choice::Group(k) => write!(f, "group {}", k + 1),
            Choice::Meet => f.write_str("meet"),
        }
    }
}

fn moded_predicates(p: &Program) -> Result<Vec<PredKey>, ModeError> {
    let preds = p.predicates();
    for k in &preds {
        let tys = arg_types(&p.decls, k)?;
        for ty in tys {
            if !p.decls.type_is_known(ty) {
                return Err(ModeError::UnknownType(k.to_string(), ty.to_string()));
            }
        }
        let md = p.decls.mode_decl(k).ok_or_else(|| ModeError::NoModeDecl(k.to_string()))?;
        if md.groups.iter().flat_map(|g| &g.modes).any(|m| m.arity() != k.arity) {
            return Err(ModeError::Arity(k.name.clone(), k.arity));
        }
    }
    Ok(preds)
}

fn choices(p: &Program, key: &PredKey) -> Vec<Choice> {
    let n = p.decls.mode_decl(key).map_or(0, |m| m.groups.len());
    let mut out: Vec<Choice> = (0..n).map(Choice::Group).collect();
    if n > 1 {
        out.push(Choice::Meet);
    }
    out
}

fn modes_of(p: &Program, key: &PredKey, c: Choice) -> Vec<Mode> {
    let md = p.decls.mode_decl(key).expect("moded");
    match c {
        Choice::Group(k) => md.groups[k].modes.clone(),
        Choice::Meet => md.groups.iter().flat_map(|g| g.modes.clone()).collect(),
    }
}

/// Check the program's clauses against explicit mode sets, one per predicate.
pub fn check_assignment(p: &Program, modes: &BTreeMap<PredKey, Vec<Mode>>) -> Result<Vec<ModeViolation>, ModeError> {
    for k in p.predicates() {
        arg_types(&p.decls, &k)?;
        if !modes.contains_key(&k) {
            return Err(ModeError::NoModeDecl(k.to_string()));
        }
    }
    let ck = Checker { decls: &p.decls, modes };
    let mut out = Vec::new();
    for c in &p.clauses {
        ck.check_clause(c, &mut out)?;
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct AssignmentResult {
    pub choices: Vec<(String, Choice)>,
    pub violations: Vec<ModeViolation>,
}

impl AssignmentResult {
    pub fn passes(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GroupCoverage {
    pub pred: String,
    pub group: String,
    pub covered: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct WellModedReport {
    pub assignments: Vec<AssignmentResult>,
    pub coverage: Vec<GroupCoverage>,
    pub well_moded: bool,
}

impl WellModedReport {
    pub fn passing(&self) -> impl Iterator<Item = &AssignmentResult> {
        self.assignments.iter().filter(|a| a.passes())
    }
}

fn reachable(p: &Program, from: &PredKey) -> BTreeSet<String> {
    let mut seen = BTreeSet::from([from.to_string()]);
    let mut stack = vec![from.clone()];
    while let Some(k) = stack.pop() {
        for c in p.clauses_for(&k) {
            for l in &c.body {
                let q = l.atom().key();
                if !q.is_eq() && !q.is_error() && seen.insert(q.to_string()) {
                    stack.push(q);
                }
            }
        }
    }
    seen
}

/// Try every candidate assignment. A group of a predicate is covered when
/// some assignment choosing it leaves no violation in the predicate or in
/// anything it calls; the program is well-moded when every group is covered.
pub fn check_well_moded(p: &Program) -> Result<WellModedReport, ModeError> {
    let preds = moded_predicates(p)?;
    let options: Vec<Vec<Choice>> = preds.iter().map(|k| choices(p, k)).collect();
    let total = options.iter().try_fold(1usize, |acc, o| acc.checked_mul(o.len()).filter(|&n| n <= MAX_ASSIGNMENTS));
    let total = total.ok_or(ModeError::TooManyAssignments(MAX_ASSIGNMENTS))?;
    let mut assignments = Vec::with_capacity(total);
    for mut n in 0..total {
        let mut pick = Vec::with_capacity(preds.len());
        let mut modes = BTreeMap::new();
        for (k, opts) in preds.iter().zip(&options) {
            let c = opts[n % opts.len()];
            n /= opts.len();
            modes.insert(k.clone(), modes_of(p, k, c));
            pick.push((k.to_string(), c));
        }
        let violations = check_assignment(p, &modes)?;
        assignments.push(AssignmentResult { choices: pick, violations });
    }
    let mut coverage = Vec::new();
    for k in &preds {
        let scope = reachable(p, k);
        let md = p.decls.mode_decl(k).expect("moded");
        for (g, group) in md.groups.iter().enumerate() {
            let covered = assignments.iter().any(|a| {
                a.choices.iter().any(|(n, c)| *n == k.to_string() && *c == Choice::Group(g))
                    && a.violations.iter().all(|v| !scope.contains(&v.pred))
            });
            coverage.push(GroupCoverage { pred: k.to_string(), group: group.to_string(), covered });
        }
    }
    let well_moded = coverage.iter().all(|c| c.covered);
    Ok(WellModedReport { assignments, coverage, well_moded })
}
