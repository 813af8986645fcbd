use std::collections::{BTreeSet, HashMap};
use std::fmt;

/// Name of the overflow element of a quotient carrier.
pub const DEEP: &str = "$deep";
pub const NIL: &str = "[]";
pub const CONS: &str = ".";

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    /// A constant is an application with no arguments.
    App(String, Vec<Term>),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Term {
        Term::Var(name.into())
    }

    pub fn constant(name: impl Into<String>) -> Term {
        Term::App(name.into(), Vec::new())
    }

    pub fn app(name: impl Into<String>, args: Vec<Term>) -> Term {
        Term::App(name.into(), args)
    }

    pub fn nil() -> Term {
        Term::constant(NIL)
    }

    pub fn cons(head: Term, tail: Term) -> Term {
        Term::App(CONS.to_string(), vec![head, tail])
    }

    pub fn list(items: Vec<Term>, tail: Term) -> Term {
        items.into_iter().rev().fold(tail, |acc, x| Term::cons(x, acc))
    }

    /// s^n(0)
    pub fn nat(n: usize) -> Term {
        (0..n).fold(Term::constant("0"), |acc, _| Term::app("s", vec![acc]))
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::App(_, args) => args.iter().all(Term::is_ground),
        }
    }

    pub fn vars_into(&self, out: &mut Vec<String>) {
        match self {
            Term::Var(v) => {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
            Term::App(_, args) => args.iter().for_each(|a| a.vars_into(out)),
        }
    }

    pub fn vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.vars_into(&mut out);
        out
    }

    pub fn occurs(&self, v: &str) -> bool {
        match self {
            Term::Var(w) => w == v,
            Term::App(_, args) => args.iter().any(|a| a.occurs(v)),
        }
    }

    pub fn occurs_functor(&self, f: &str) -> bool {
        match self {
            Term::Var(_) => false,
            Term::App(g, args) => g == f || args.iter().any(|a| a.occurs_functor(f)),
        }
    }

    pub fn functors_into(&self, out: &mut BTreeSet<(String, usize)>) {
        if let Term::App(f, args) = self {
            out.insert((f.clone(), args.len()));
            args.iter().for_each(|a| a.functors_into(out));
        }
    }

    pub fn rename(&self, f: &mut impl FnMut(&str) -> String) -> Term {
        match self {
            Term::Var(v) => Term::Var(f(v)),
            Term::App(n, args) => Term::App(n.clone(), args.iter().map(|a| a.rename(f)).collect()),
        }
    }
}

/// Depth of a term: 1 for variables and constants.
pub fn depth(t: &Term) -> usize {
    match t {
        Term::Var(_) => 1,
        Term::App(_, args) => 1 + args.iter().map(depth).max().unwrap_or(0),
    }
}

/// Source of fresh variable names for pruning and renaming.
#[derive(Debug, Default, Clone)]
pub struct Fresh {
    next: usize,
    prefix: String,
}

impl Fresh {
    pub fn new(prefix: &str) -> Fresh {
        Fresh { next: 0, prefix: prefix.to_string() }
    }

    pub fn var(&mut self) -> Term {
        Term::Var(self.name())
    }

    pub fn name(&mut self) -> String {
        self.next += 1;
        format!("_{}{}", self.prefix, self.next)
    }
}

/// Replace every subterm at depth `k` that is not a variable or constant by a
/// fresh variable, so the result has depth at most `k`.
pub fn prune(t: &Term, k: usize, fresh: &mut Fresh) -> Term {
    assert!(k >= 1, "prune depth must be positive");
    prune_at(t, 1, k, fresh)
}

fn prune_at(t: &Term, level: usize, k: usize, fresh: &mut Fresh) -> Term {
    match t {
        Term::Var(_) => t.clone(),
        Term::App(_, args) if args.is_empty() => t.clone(),
        Term::App(f, args) => {
            if level >= k {
                fresh.var()
            } else {
                Term::App(f.clone(), args.iter().map(|a| prune_at(a, level + 1, k, fresh)).collect())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PredKey {
    pub name: String,
    pub arity: usize,
}

impl PredKey {
    pub fn new(name: impl Into<String>, arity: usize) -> PredKey {
        PredKey { name: name.into(), arity }
    }

    pub fn is_eq(&self) -> bool {
        self.name == "=" && self.arity == 2
    }

    pub fn is_error(&self) -> bool {
        self.name == "error" && self.arity == 1
    }
}

impl fmt::Display for PredKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.name, self.arity)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub pred: String,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(pred: impl Into<String>, args: Vec<Term>) -> Atom {
        Atom { pred: pred.into(), args }
    }

    pub fn eq(a: Term, b: Term) -> Atom {
        Atom::new("=", vec![a, b])
    }

    pub fn key(&self) -> PredKey {
        PredKey::new(self.pred.clone(), self.args.len())
    }

    pub fn is_eq(&self) -> bool {
        self.pred == "=" && self.args.len() == 2
    }

    pub fn is_error(&self) -> bool {
        self.pred == "error" && self.args.len() == 1
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(Term::is_ground)
    }

    pub fn vars_into(&self, out: &mut Vec<String>) {
        self.args.iter().for_each(|a| a.vars_into(out));
    }

    pub fn vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.vars_into(&mut out);
        out
    }

    pub fn as_term(&self) -> Term {
        Term::App(self.pred.clone(), self.args.clone())
    }

    pub fn from_term(t: &Term) -> Option<Atom> {
        match t {
            Term::App(f, args) => Some(Atom::new(f.clone(), args.clone())),
            Term::Var(_) => None,
        }
    }

    pub fn apply(&self, s: &Substitution) -> Atom {
        Atom::new(self.pred.clone(), self.args.iter().map(|a| s.apply(a)).collect())
    }

    pub fn rename(&self, f: &mut impl FnMut(&str) -> String) -> Atom {
        Atom::new(self.pred.clone(), self.args.iter().map(|a| a.rename(f)).collect())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Literal {
    Pos(Atom),
    Neg(Atom),
}

impl Literal {
    pub fn atom(&self) -> &Atom {
        match self {
            Literal::Pos(a) | Literal::Neg(a) => a,
        }
    }

    pub fn is_neg(&self) -> bool {
        matches!(self, Literal::Neg(_))
    }

    pub fn map_atom(&self, f: impl FnOnce(&Atom) -> Atom) -> Literal {
        match self {
            Literal::Pos(a) => Literal::Pos(f(a)),
            Literal::Neg(a) => Literal::Neg(f(a)),
        }
    }

    pub fn apply(&self, s: &Substitution) -> Literal {
        self.map_atom(|a| a.apply(s))
    }

    pub fn vars_into(&self, out: &mut Vec<String>) {
        self.atom().vars_into(out)
    }
}

/// A source clause. Bodies with `;` are split into one clause per disjunct.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Clause {
    pub head: Atom,
    pub body: Vec<Literal>,
    pub line: usize,
}

impl Clause {
    pub fn vars(&self) -> Vec<String> {
        let mut out = self.head.vars();
        self.body.iter().for_each(|l| l.vars_into(&mut out));
        out
    }

    pub fn rename(&self, f: &mut impl FnMut(&str) -> String) -> Clause {
        Clause {
            head: self.head.rename(f),
            body: self.body.iter().map(|l| l.map_atom(|a| a.rename(f))).collect(),
            line: self.line,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Substitution {
    map: HashMap<String, Term>,
}

impl Substitution {
    pub fn new() -> Substitution {
        Substitution::default()
    }

    pub fn from_pairs<I: IntoIterator<Item = (String, Term)>>(pairs: I) -> Substitution {
        Substitution { map: pairs.into_iter().collect() }
    }

    pub fn get(&self, v: &str) -> Option<&Term> {
        self.map.get(v)
    }

    pub fn bind(&mut self, v: impl Into<String>, t: Term) {
        self.map.insert(v.into(), t);
    }

    pub fn contains(&self, v: &str) -> bool {
        self.map.contains_key(v)
    }

    pub fn domain(&self) -> impl Iterator<Item = &String> {
        self.map.keys()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Apply, following chains of bindings, so the result is fully resolved.
    pub fn apply(&self, t: &Term) -> Term {
        match t {
            Term::Var(v) => match self.map.get(v) {
                Some(b) if b != t => self.apply(b),
                _ => t.clone(),
            },
            Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| self.apply(a)).collect()),
        }
    }

    fn walk<'a>(&'a self, t: &'a Term) -> &'a Term {
        let mut cur = t;
        while let Term::Var(v) = cur {
            match self.map.get(v) {
                Some(b) => cur = b,
                None => break,
            }
        }
        cur
    }

    /// Unify with occurs check, extending `self`. On failure `self` may hold
    /// partial bindings; callers clone first when they need to roll back.
    pub fn unify(&mut self, a: &Term, b: &Term) -> bool {
        let a = self.walk(a).clone();
        let b = self.walk(b).clone();
        match (&a, &b) {
            (Term::Var(x), Term::Var(y)) if x == y => true,
            (Term::Var(x), _) => {
                if self.apply(&b).occurs(x) {
                    return false;
                }
                self.map.insert(x.clone(), b);
                true
            }
            (_, Term::Var(y)) => {
                if self.apply(&a).occurs(y) {
                    return false;
                }
                self.map.insert(y.clone(), a);
                true
            }
            (Term::App(f, xs), Term::App(g, ys)) => {
                f == g && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| self.unify(x, y))
            }
        }
    }

    pub fn unify_atoms(&mut self, a: &Atom, b: &Atom) -> bool {
        a.pred == b.pred
            && a.args.len() == b.args.len()
            && a.args.iter().zip(&b.args).all(|(x, y)| self.unify(x, y))
    }

    /// Restrict to the given variables, fully resolved.
    pub fn restrict(&self, vars: &[String]) -> Substitution {
        let mut out = Substitution::new();
        for v in vars {
            let t = self.apply(&Term::Var(v.clone()));
            if t != Term::Var(v.clone()) {
                out.bind(v.clone(), t);
            }
        }
        out
    }
}

pub fn mgu(a: &Atom, b: &Atom) -> Option<Substitution> {
    let mut s = Substitution::new();
    s.unify_atoms(a, b).then_some(s)
}

/// One-way matching: find σ with pattern σ = target. Target variables are
/// treated as constants.
pub fn match_term(pattern: &Term, target: &Term, s: &mut Substitution) -> bool {
    match pattern {
        Term::Var(v) => match s.get(v) {
            Some(b) => b == target,
            None => {
                s.bind(v.clone(), target.clone());
                true
            }
        },
        Term::App(f, xs) => match target {
            Term::App(g, ys) => {
                f == g && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| match_term(x, y, s))
            }
            Term::Var(_) => false,
        },
    }
}

pub fn match_atom(pattern: &Atom, target: &Atom) -> Option<Substitution> {
    if pattern.pred != target.pred || pattern.args.len() != target.args.len() {
        return None;
    }
    let mut s = Substitution::new();
    pattern
        .args
        .iter()
        .zip(&target.args)
        .all(|(p, t)| match_term(p, t, &mut s))
        .then_some(s)
}

/// Does `general` generalize `specific` (specific is an instance of general)?
pub fn generalizes(general: &Atom, specific: &Atom) -> bool {
    match_atom(general, specific).is_some()
}

/// Rename variables to a canonical numbering so variants compare equal.
pub fn canonical_variant(a: &Atom) -> Atom {
    let mut names: Vec<String> = Vec::new();
    a.rename(&mut |v| {
        let i = match names.iter().position(|n| n == v) {
            Some(i) => i,
            None => {
                names.push(v.to_string());
                names.len() - 1
            }
        };
        format!("_V{}", i)
    })
}
