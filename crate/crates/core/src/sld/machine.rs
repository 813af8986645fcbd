//! Heap-based resolution machine: structure copying, a binding trail and a
//! choicepoint stack. Leftmost selection, textual clause order.

use std::collections::HashMap;

use crate::syntax::{Atom, Literal, Program, Term};

const NONE: u32 = u32::MAX;

/// Nesting limit for derivations started by negated literals; deeper
/// nesting counts as running out of budget.
const MAX_NEG_DEPTH: usize = 256;

#[derive(Clone, Copy, Debug)]
enum Node {
    Var(Option<u32>),
    Fun { sym: u32, args: u32, arity: u32 },
}

#[derive(Clone, Debug)]
enum TTerm {
    Var(u32),
    Fun(u32, Vec<TTerm>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum GoalKind {
    Call,
    Neg,
    Eq,
    NegEq,
    Error,
}

#[derive(Clone, Debug)]
struct TLit {
    kind: GoalKind,
    atom: TTerm,
}

#[derive(Clone, Debug)]
struct TClause {
    head: TTerm,
    body: Vec<TLit>,
    nvars: u32,
    index: usize,
}

/// Clauses compiled against a symbol table. Shared by every machine run on
/// the same program.
#[derive(Clone, Debug, Default)]
pub(crate) struct Compiled {
    syms: Vec<(String, usize)>,
    sym_index: HashMap<(String, usize), u32>,
    clauses: HashMap<u32, Vec<TClause>>,
}

impl Compiled {
    pub(crate) fn new(p: &Program) -> Compiled {
        let mut c = Compiled::default();
        for (index, cl) in p.clauses.iter().enumerate() {
            let mut vars: Vec<String> = Vec::new();
            let head = c.template(&cl.head.as_term(), &mut vars);
            let body = cl.body.iter().map(|l| c.template_lit(l, &mut vars)).collect();
            let sym = c.intern(&cl.head.pred, cl.head.args.len());
            c.clauses.entry(sym).or_default().push(TClause { head, body, nvars: vars.len() as u32, index });
        }
        c
    }

    fn intern(&mut self, name: &str, arity: usize) -> u32 {
        let key = (name.to_string(), arity);
        if let Some(&s) = self.sym_index.get(&key) {
            return s;
        }
        let s = self.syms.len() as u32;
        self.syms.push(key.clone());
        self.sym_index.insert(key, s);
        s
    }

    fn template(&mut self, t: &Term, vars: &mut Vec<String>) -> TTerm {
        match t {
            Term::Var(v) => {
                let i = vars.iter().position(|x| x == v).unwrap_or_else(|| {
                    vars.push(v.clone());
                    vars.len() - 1
                });
                TTerm::Var(i as u32)
            }
            Term::App(f, args) => {
                let s = self.intern(f, args.len());
                TTerm::Fun(s, args.iter().map(|a| self.template(a, vars)).collect())
            }
        }
    }

    fn template_lit(&mut self, l: &Literal, vars: &mut Vec<String>) -> TLit {
        let a = l.atom();
        let kind = match (l.is_neg(), a.is_eq(), a.is_error()) {
            (false, true, _) => GoalKind::Eq,
            (true, true, _) => GoalKind::NegEq,
            (false, false, true) => GoalKind::Error,
            (true, false, true) => GoalKind::Error,
            (false, false, false) => GoalKind::Call,
            (true, false, false) => GoalKind::Neg,
        };
        TLit { kind, atom: self.template(&a.as_term(), vars) }
    }
}

#[derive(Clone, Copy, Debug)]
struct Goal {
    kind: GoalKind,
    atom: u32,
    next: u32,
    parent: u32,
}

#[derive(Clone, Copy, Debug)]
struct Choice {
    goal: u32,
    next_clause: usize,
    nodes: usize,
    args: usize,
    trail: usize,
    goals: usize,
    proofs: usize,
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct ProofRec {
    pub atom: u32,
    pub parent: u32,
    pub kind: GoalKind,
    pub clause: Option<usize>,
}

#[derive(Debug)]
pub(crate) enum Step {
    Solution,
    Exhausted,
    Budget,
    Aborted(Term),
    Flounder(Atom),
}

pub(crate) struct Machine<'c> {
    code: &'c Compiled,
    extra_syms: Vec<(String, usize)>,
    extra_index: HashMap<(String, usize), u32>,
    nodes: Vec<Node>,
    args: Vec<u32>,
    trail: Vec<u32>,
    goals: Vec<Goal>,
    choices: Vec<Choice>,
    proofs: Vec<ProofRec>,
    cur: u32,
    query_vars: Vec<(String, u32)>,
    started: bool,
    neg_depth: usize,
    /// Resolution steps left, shared with sub-derivations for negation.
    pub budget: usize,
}

impl<'c> Machine<'c> {
    pub(crate) fn new(code: &'c Compiled, query: &[Literal], budget: usize) -> Machine<'c> {
        let mut m = Machine {
            code,
            extra_syms: Vec::new(),
            extra_index: HashMap::new(),
            nodes: Vec::new(),
            args: Vec::new(),
            trail: Vec::new(),
            goals: Vec::new(),
            choices: Vec::new(),
            proofs: Vec::new(),
            cur: NONE,
            query_vars: Vec::new(),
            started: false,
            neg_depth: 0,
            budget,
        };
        let mut goal_ids = Vec::new();
        for l in query {
            let a = l.atom();
            let kind = match (l.is_neg(), a.is_eq(), a.is_error()) {
                (_, _, true) => GoalKind::Error,
                (false, true, _) => GoalKind::Eq,
                (true, true, _) => GoalKind::NegEq,
                (false, false, _) => GoalKind::Call,
                (true, false, _) => GoalKind::Neg,
            };
            let addr = m.build_term(&a.as_term());
            goal_ids.push(m.goals.len() as u32);
            m.goals.push(Goal { kind, atom: addr, next: NONE, parent: NONE });
        }
        for w in 0..goal_ids.len() {
            if w + 1 < goal_ids.len() {
                m.goals[goal_ids[w] as usize].next = goal_ids[w + 1];
            }
        }
        m.cur = goal_ids.first().copied().unwrap_or(NONE);
        m
    }

    fn sym(&mut self, name: &str, arity: usize) -> u32 {
        let key = (name.to_string(), arity);
        if let Some(&s) = self.code.sym_index.get(&key) {
            return s;
        }
        if let Some(&s) = self.extra_index.get(&key) {
            return s;
        }
        let s = (self.code.syms.len() + self.extra_syms.len()) as u32;
        self.extra_syms.push(key.clone());
        self.extra_index.insert(key, s);
        s
    }

    fn sym_name(&self, s: u32) -> &(String, usize) {
        let s = s as usize;
        if s < self.code.syms.len() {
            &self.code.syms[s]
        } else {
            &self.extra_syms[s - self.code.syms.len()]
        }
    }

    fn build_term(&mut self, t: &Term) -> u32 {
        match t {
            Term::Var(v) => {
                if let Some(&(_, a)) = self.query_vars.iter().find(|(n, _)| n == v) {
                    return a;
                }
                let a = self.nodes.len() as u32;
                self.nodes.push(Node::Var(None));
                self.query_vars.push((v.clone(), a));
                a
            }
            Term::App(f, xs) => {
                let sym = self.sym(f, xs.len());
                let ids: Vec<u32> = xs.iter().map(|x| self.build_term(x)).collect();
                self.push_fun(sym, &ids)
            }
        }
    }

    fn push_fun(&mut self, sym: u32, ids: &[u32]) -> u32 {
        let start = self.args.len() as u32;
        self.args.extend_from_slice(ids);
        let a = self.nodes.len() as u32;
        self.nodes.push(Node::Fun { sym, args: start, arity: ids.len() as u32 });
        a
    }

    fn instantiate(&mut self, t: &TTerm, base: u32) -> u32 {
        match t {
            TTerm::Var(i) => base + i,
            TTerm::Fun(sym, xs) => {
                let ids: Vec<u32> = xs.iter().map(|x| self.instantiate(x, base)).collect();
                self.push_fun(*sym, &ids)
            }
        }
    }

    fn deref(&self, mut a: u32) -> u32 {
        while let Node::Var(Some(b)) = self.nodes[a as usize] {
            a = b;
        }
        a
    }

    fn bind(&mut self, v: u32, t: u32) {
        self.nodes[v as usize] = Node::Var(Some(t));
        self.trail.push(v);
    }

    fn occurs(&self, v: u32, t: u32) -> bool {
        let mut stack = vec![t];
        while let Some(x) = stack.pop() {
            let x = self.deref(x);
            match self.nodes[x as usize] {
                Node::Var(_) => {
                    if x == v {
                        return true;
                    }
                }
                Node::Fun { args, arity, .. } => {
                    stack.extend_from_slice(&self.args[args as usize..(args + arity) as usize]);
                }
            }
        }
        false
    }

    fn unify(&mut self, a: u32, b: u32) -> bool {
        let mut stack = vec![(a, b)];
        while let Some((x, y)) = stack.pop() {
            let x = self.deref(x);
            let y = self.deref(y);
            if x == y {
                continue;
            }
            match (self.nodes[x as usize], self.nodes[y as usize]) {
                (Node::Var(_), Node::Var(_)) => {
                    let (young, old) = if x > y { (x, y) } else { (y, x) };
                    self.bind(young, old);
                }
                (Node::Var(_), Node::Fun { .. }) => {
                    if self.occurs(x, y) {
                        return false;
                    }
                    self.bind(x, y);
                }
                (Node::Fun { .. }, Node::Var(_)) => {
                    if self.occurs(y, x) {
                        return false;
                    }
                    self.bind(y, x);
                }
                (Node::Fun { sym: f, args: xa, arity: n }, Node::Fun { sym: g, args: ya, arity: m }) => {
                    if f != g || n != m {
                        return false;
                    }
                    for i in 0..n {
                        stack.push((self.args[(xa + i) as usize], self.args[(ya + i) as usize]));
                    }
                }
            }
        }
        true
    }

    fn is_ground(&self, t: u32) -> bool {
        let mut stack = vec![t];
        while let Some(x) = stack.pop() {
            let x = self.deref(x);
            match self.nodes[x as usize] {
                Node::Var(_) => return false,
                Node::Fun { args, arity, .. } => stack.extend_from_slice(&self.args[args as usize..(args + arity) as usize]),
            }
        }
        true
    }

    pub(crate) fn to_term(&self, t: u32) -> Term {
        let t = self.deref(t);
        match self.nodes[t as usize] {
            Node::Var(_) => match self.query_vars.iter().find(|(_, a)| *a == t) {
                Some((n, _)) => Term::Var(n.clone()),
                None => Term::Var(format!("_G{}", t)),
            },
            Node::Fun { sym, args, arity } => {
                let (name, _) = self.sym_name(sym).clone();
                Term::App(name, (args..args + arity).map(|i| self.to_term(self.args[i as usize])).collect())
            }
        }
    }

    pub(crate) fn to_atom(&self, t: u32) -> Atom {
        Atom::from_term(&self.to_term(t)).expect("goal is an application")
    }

    fn mark(&self, goal: u32, next_clause: usize) -> Choice {
        Choice {
            goal,
            next_clause,
            nodes: self.nodes.len(),
            args: self.args.len(),
            trail: self.trail.len(),
            goals: self.goals.len(),
            proofs: self.proofs.len(),
        }
    }

    fn restore(&mut self, c: &Choice) {
        while self.trail.len() > c.trail {
            let v = self.trail.pop().unwrap();
            if (v as usize) < c.nodes {
                self.nodes[v as usize] = Node::Var(None);
            }
        }
        self.nodes.truncate(c.nodes);
        self.args.truncate(c.args);
        self.goals.truncate(c.goals);
        self.proofs.truncate(c.proofs);
    }

    /// Resolve goal `gid` against clauses from `from` on. Returns false when
    /// no clause head unifies.
    fn resolve(&mut self, gid: u32, from: usize) -> bool {
        let g = self.goals[gid as usize];
        let Node::Fun { sym, args: gargs, arity } = self.nodes[self.deref(g.atom) as usize] else {
            unreachable!("call goal is an application")
        };
        let code = self.code;
        let Some(clauses) = code.clauses.get(&sym) else {
            return false;
        };
        for (ci, cl) in clauses.iter().enumerate().skip(from) {
            let mark = self.mark(gid, ci + 1);
            let base = self.nodes.len() as u32;
            for _ in 0..cl.nvars {
                self.nodes.push(Node::Var(None));
            }
            let TTerm::Fun(_, hargs) = &cl.head else { unreachable!() };
            let mut ok = true;
            for (i, h) in hargs.iter().enumerate() {
                let ha = self.instantiate(h, base);
                if !self.unify(ha, self.args[(gargs + i as u32) as usize]) {
                    ok = false;
                    break;
                }
            }
            debug_assert_eq!(hargs.len() as u32, arity);
            if !ok {
                self.restore(&mark);
                continue;
            }
            if ci + 1 < clauses.len() {
                self.choices.push(mark);
            }
            let pid = self.proofs.len() as u32;
            self.proofs.push(ProofRec { atom: g.atom, parent: g.parent, kind: GoalKind::Call, clause: Some(cl.index) });
            let mut next = g.next;
            for lit in cl.body.iter().rev() {
                let a = self.instantiate(&lit.atom, base);
                let id = self.goals.len() as u32;
                self.goals.push(Goal { kind: lit.kind, atom: a, next, parent: pid });
                next = id;
            }
            self.cur = next;
            return true;
        }
        false
    }

    fn backtrack(&mut self) -> bool {
        while let Some(c) = self.choices.pop() {
            self.restore(&c);
            if self.resolve(c.goal, c.next_clause) {
                return true;
            }
        }
        false
    }

    /// Run to the next solution.
    pub(crate) fn run(&mut self) -> Step {
        if self.started && !self.backtrack() {
            return Step::Exhausted;
        }
        self.started = true;
        loop {
            if self.cur == NONE {
                return Step::Solution;
            }
            if self.budget == 0 {
                return Step::Budget;
            }
            self.budget -= 1;
            let gid = self.cur;
            let g = self.goals[gid as usize];
            let ok = match g.kind {
                GoalKind::Call => self.resolve(gid, 0),
                GoalKind::Eq => {
                    let Node::Fun { args, .. } = self.nodes[g.atom as usize] else { unreachable!() };
                    let (l, r) = (self.args[args as usize], self.args[args as usize + 1]);
                    let ok = self.unify(l, r);
                    if ok {
                        self.proofs.push(ProofRec { atom: g.atom, parent: g.parent, kind: GoalKind::Eq, clause: None });
                        self.cur = g.next;
                    }
                    ok
                }
                GoalKind::NegEq => {
                    if !self.is_ground(g.atom) {
                        return Step::Flounder(self.to_atom(g.atom));
                    }
                    let Node::Fun { args, .. } = self.nodes[g.atom as usize] else { unreachable!() };
                    let (l, r) = (self.args[args as usize], self.args[args as usize + 1]);
                    let mark = self.mark(gid, 0);
                    let unifies = self.unify(l, r);
                    self.restore(&mark);
                    if unifies {
                        false
                    } else {
                        self.proofs.push(ProofRec { atom: g.atom, parent: g.parent, kind: GoalKind::NegEq, clause: None });
                        self.cur = g.next;
                        true
                    }
                }
                GoalKind::Error => {
                    let Node::Fun { args, .. } = self.nodes[self.deref(g.atom) as usize] else { unreachable!() };
                    return Step::Aborted(self.to_term(self.args[args as usize]));
                }
                GoalKind::Neg => {
                    if !self.is_ground(g.atom) {
                        return Step::Flounder(self.to_atom(g.atom));
                    }
                    let atom = self.to_atom(g.atom);
                    let lit = [Literal::Pos(atom)];
                    if self.neg_depth >= MAX_NEG_DEPTH {
                        return Step::Budget;
                    }
                    let mut sub = Machine::new(self.code, &lit, self.budget);
                    sub.neg_depth = self.neg_depth + 1;
                    let r = sub.run();
                    self.budget = sub.budget;
                    match r {
                        Step::Solution => false,
                        Step::Exhausted => {
                            self.proofs.push(ProofRec { atom: g.atom, parent: g.parent, kind: GoalKind::Neg, clause: None });
                            self.cur = g.next;
                            true
                        }
                        other => return other,
                    }
                }
            };
            if !ok && !self.backtrack() {
                return Step::Exhausted;
            }
        }
    }

    pub(crate) fn query_binding(&self, v: &str) -> Option<Term> {
        self.query_vars.iter().find(|(n, _)| n == v).map(|(_, a)| self.to_term(*a))
    }

    pub(crate) fn proof_records(&self) -> &[ProofRec] {
        &self.proofs
    }

    pub(crate) fn proof_atom(&self, r: &ProofRec) -> Atom {
        self.to_atom(r.atom)
    }

    pub(crate) fn proof_parent(&self, r: &ProofRec) -> Option<usize> {
        (r.parent != NONE).then_some(r.parent as usize)
    }

}
