//! SLDNF resolution with leftmost selection and a step budget, producing
//! proof trees for successes and failure trees for finite failures.

mod machine;

use std::cell::Cell;
use std::fmt;

use serde::Serialize;

use crate::syntax::{mgu, Atom, Clause, Literal, Program, Substitution, Term};
use machine::{Compiled, GoalKind, Machine, Step};

pub const DEFAULT_BUDGET: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SldError {
    #[error("negated literal {0} is not ground when selected")]
    Flounder(Atom),
    #[error("step budget exhausted")]
    BudgetExceeded,
    #[error("query {0} does not succeed")]
    NotSucceeded(String),
    #[error("query {0} does not finitely fail")]
    NotFailed(String),
    #[error("computation aborted by error({0})")]
    Aborted(Term),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    /// A resolved call.
    Positive,
    /// `not A` that succeeded because A finitely failed.
    Negative,
    /// An equality or disequality.
    Builtin,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProofTree {
    pub atom: Atom,
    pub kind: NodeKind,
    /// Source clause used to resolve a positive node.
    pub clause: Option<usize>,
    pub children: Vec<ProofTree>,
}

impl ProofTree {
    pub fn size(&self) -> usize {
        1 + self.children.iter().map(ProofTree::size).sum::<usize>()
    }

    /// Positive atoms of the tree in pre-order.
    pub fn positive_atoms(&self) -> Vec<&Atom> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(n) = stack.pop() {
            if n.kind == NodeKind::Positive {
                out.push(&n.atom);
            }
            stack.extend(n.children.iter().rev());
        }
        out
    }

    fn fmt_indent(&self, f: &mut fmt::Formatter<'_>, indent: usize) -> fmt::Result {
        let mark = match self.kind {
            NodeKind::Positive => "",
            NodeKind::Negative => "not ",
            NodeKind::Builtin => "",
        };
        writeln!(f, "{:width$}{}{}", "", mark, self.atom, width = indent * 2)?;
        for c in &self.children {
            c.fmt_indent(f, indent + 1)?;
        }
        Ok(())
    }
}

impl fmt::Display for ProofTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_indent(f, 0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FailureTree {
    pub atom: Atom,
    pub attempts: Vec<FailedAttempt>,
}

/// One clause tried against the failed atom.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FailedAttempt {
    pub clause: usize,
    pub head_unifies: bool,
    pub children: Vec<FailureChild>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FailureChild {
    /// A ground body atom that finitely failed.
    Failed(FailureTree),
    /// `not A` failed because A succeeded.
    NegSucceeded { atom: Atom, proof: ProofTree },
}

impl FailureTree {
    /// Children across all attempts, without duplicates.
    pub fn children(&self) -> Vec<&FailureChild> {
        let mut out: Vec<&FailureChild> = Vec::new();
        for a in &self.attempts {
            for c in &a.children {
                if !out.iter().any(|o| o.atom() == c.atom() && o.is_negative() == c.is_negative()) {
                    out.push(c);
                }
            }
        }
        out
    }

    fn fmt_indent(&self, f: &mut fmt::Formatter<'_>, indent: usize) -> fmt::Result {
        writeln!(f, "{:width$}{} fails", "", self.atom, width = indent * 2)?;
        for c in self.children() {
            match c {
                FailureChild::Failed(t) => t.fmt_indent(f, indent + 1)?,
                FailureChild::NegSucceeded { atom, .. } => {
                    writeln!(f, "{:width$}not {} fails ({} succeeds)", "", atom, atom, width = (indent + 1) * 2)?
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for FailureTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_indent(f, 0)
    }
}

impl FailureChild {
    pub fn atom(&self) -> &Atom {
        match self {
            FailureChild::Failed(t) => &t.atom,
            FailureChild::NegSucceeded { atom, .. } => atom,
        }
    }

    pub fn is_negative(&self) -> bool {
        matches!(self, FailureChild::NegSucceeded { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SldOutcome {
    Succeeds { answer: Substitution, proofs: Vec<ProofTree> },
    /// The failure tree is built when the query is a single ground atom.
    FinitelyFails(Option<FailureTree>),
    BudgetExceeded,
    AbortedByError(Term),
}

/// Outcome without trees.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Succeeds,
    FinitelyFails,
    BudgetExceeded,
    AbortedByError,
}

/// A program compiled for resolution.
pub struct Sld {
    code: Compiled,
    clauses: Vec<Clause>,
    renames: Cell<usize>,
}

impl Sld {
    pub fn new(p: &Program) -> Sld {
        Sld { code: Compiled::new(p), clauses: p.clauses.clone(), renames: Cell::new(0) }
    }

    pub fn decide(&self, query: &[Literal], budget: usize) -> Result<Verdict, SldError> {
        let mut m = Machine::new(&self.code, query, budget);
        match m.run() {
            Step::Solution => Ok(Verdict::Succeeds),
            Step::Exhausted => Ok(Verdict::FinitelyFails),
            Step::Budget => Ok(Verdict::BudgetExceeded),
            Step::Aborted(_) => Ok(Verdict::AbortedByError),
            Step::Flounder(a) => Err(SldError::Flounder(a)),
        }
    }

    pub fn solve(&self, query: &[Literal], budget: usize) -> Result<SldOutcome, SldError> {
        let mut m = Machine::new(&self.code, query, budget);
        match m.run() {
            Step::Solution => {
                let answer = self.answer(&m, query);
                Ok(SldOutcome::Succeeds { answer, proofs: proofs_of(&m) })
            }
            Step::Exhausted => {
                let left = m.budget;
                let tree = match query {
                    [Literal::Pos(a)] if a.is_ground() && !a.is_eq() => {
                        let mut b = left.max(budget / 2);
                        Some(self.failure_tree(a, &mut b)?)
                    }
                    _ => None,
                };
                Ok(SldOutcome::FinitelyFails(tree))
            }
            Step::Budget => Ok(SldOutcome::BudgetExceeded),
            Step::Aborted(t) => Ok(SldOutcome::AbortedByError(t)),
            Step::Flounder(a) => Err(SldError::Flounder(a)),
        }
    }

    fn answer(&self, m: &Machine<'_>, query: &[Literal]) -> Substitution {
        let mut vars = Vec::new();
        query.iter().for_each(|l| l.vars_into(&mut vars));
        let run = self.renames.get();
        self.renames.set(run + 1);
        let mut out = Substitution::new();
        for v in &vars {
            if let Some(t) = m.query_binding(v) {
                let t = t.rename(&mut |x| if vars.iter().any(|q| q == x) { x.to_string() } else { format!("{}_{}", x, run) });
                if t != Term::Var(v.clone()) {
                    out.bind(v.clone(), t);
                }
            }
        }
        out
    }

    /// Every answer to the query, in SLD order. Fails with BudgetExceeded when
    /// the search does not terminate within the budget.
    pub fn solutions(&self, query: &[Literal], budget: &mut usize) -> Result<Vec<Substitution>, SldError> {
        let mut m = Machine::new(&self.code, query, *budget);
        let mut out = Vec::new();
        loop {
            let r = m.run();
            *budget = m.budget;
            match r {
                Step::Solution => out.push(self.answer(&m, query)),
                Step::Exhausted => return Ok(out),
                Step::Budget => return Err(SldError::BudgetExceeded),
                Step::Aborted(t) => return Err(SldError::Aborted(t)),
                Step::Flounder(a) => return Err(SldError::Flounder(a)),
            }
        }
    }

    pub fn build_proof_tree(&self, atom: &Atom, budget: usize) -> Result<ProofTree, SldError> {
        match self.solve(&[Literal::Pos(atom.clone())], budget)? {
            SldOutcome::Succeeds { mut proofs, .. } => Ok(proofs.remove(0)),
            SldOutcome::BudgetExceeded => Err(SldError::BudgetExceeded),
            SldOutcome::AbortedByError(t) => Err(SldError::Aborted(t)),
            SldOutcome::FinitelyFails(_) => Err(SldError::NotSucceeded(atom.to_string())),
        }
    }

    pub fn build_failure_tree(&self, atom: &Atom, budget: usize) -> Result<FailureTree, SldError> {
        match self.decide(&[Literal::Pos(atom.clone())], budget)? {
            Verdict::FinitelyFails => {
                let mut b = budget;
                self.failure_tree(atom, &mut b)
            }
            Verdict::BudgetExceeded => Err(SldError::BudgetExceeded),
            _ => Err(SldError::NotFailed(atom.to_string())),
        }
    }

    fn rename_apart(&self, c: &Clause) -> Clause {
        let n = self.renames.get();
        self.renames.set(n + 1);
        c.rename(&mut |v| format!("{}_R{}", v, n))
    }

    fn failure_tree(&self, atom: &Atom, budget: &mut usize) -> Result<FailureTree, SldError> {
        let mut attempts = Vec::new();
        for (ci, c) in self.clauses.iter().enumerate() {
            if c.head.key() != atom.key() {
                continue;
            }
            let c = self.rename_apart(c);
            let Some(s) = mgu(&c.head, atom) else {
                attempts.push(FailedAttempt { clause: ci, head_unifies: false, children: Vec::new() });
                continue;
            };
            let mut children = Vec::new();
            self.explore(atom, &c.body, 0, s, budget, &mut children)?;
            attempts.push(FailedAttempt { clause: ci, head_unifies: true, children });
        }
        Ok(FailureTree { atom: atom.clone(), attempts })
    }

    fn explore(
        &self,
        root: &Atom,
        body: &[Literal],
        k: usize,
        s: Substitution,
        budget: &mut usize,
        out: &mut Vec<FailureChild>,
    ) -> Result<(), SldError> {
        if k == body.len() {
            return Err(SldError::NotFailed(root.to_string()));
        }
        if *budget == 0 {
            return Err(SldError::BudgetExceeded);
        }
        *budget -= 1;
        let lit = body[k].apply(&s);
        let a = lit.atom();
        if a.is_error() {
            return Err(SldError::Aborted(a.args[0].clone()));
        }
        match &lit {
            Literal::Pos(a) if a.is_eq() => {
                let mut s2 = s.clone();
                if s2.unify(&a.args[0], &a.args[1]) {
                    let s2 = resolve(&s2);
                    self.explore(root, body, k + 1, s2, budget, out)?;
                }
            }
            Literal::Neg(a) if a.is_eq() => {
                if !a.is_ground() {
                    return Err(SldError::Flounder(a.clone()));
                }
                if a.args[0] != a.args[1] {
                    self.explore(root, body, k + 1, s, budget, out)?;
                }
            }
            Literal::Pos(a) => {
                let sols = self.solutions(std::slice::from_ref(&lit), budget)?;
                if sols.is_empty() {
                    if a.is_ground() && !out.iter().any(|c| !c.is_negative() && c.atom() == a) {
                        let t = self.failure_tree(a, budget)?;
                        out.push(FailureChild::Failed(t));
                    }
                } else {
                    for sol in sols {
                        let mut s2 = s.clone();
                        for v in sol.domain() {
                            s2.bind(v.clone(), sol.get(v).unwrap().clone());
                        }
                        self.explore(root, body, k + 1, resolve(&s2), budget, out)?;
                    }
                }
            }
            Literal::Neg(a) => {
                if !a.is_ground() {
                    return Err(SldError::Flounder(a.clone()));
                }
                let mut m = Machine::new(&self.code, &[Literal::Pos(a.clone())], *budget);
                let r = m.run();
                *budget = m.budget;
                match r {
                    Step::Solution => {
                        if !out.iter().any(|c| c.is_negative() && c.atom() == a) {
                            let proof = proofs_of(&m).remove(0);
                            out.push(FailureChild::NegSucceeded { atom: a.clone(), proof });
                        }
                    }
                    Step::Exhausted => self.explore(root, body, k + 1, s, budget, out)?,
                    Step::Budget => return Err(SldError::BudgetExceeded),
                    Step::Aborted(t) => return Err(SldError::Aborted(t)),
                    Step::Flounder(a) => return Err(SldError::Flounder(a)),
                }
            }
        }
        Ok(())
    }
}

fn resolve(s: &Substitution) -> Substitution {
    let vars: Vec<String> = s.domain().cloned().collect();
    s.restrict(&vars)
}

fn proofs_of(m: &Machine<'_>) -> Vec<ProofTree> {
    let recs = m.proof_records();
    let mut trees: Vec<Option<ProofTree>> = recs
        .iter()
        .map(|r| {
            Some(ProofTree {
                atom: m.proof_atom(r),
                kind: match r.kind {
                    GoalKind::Call => NodeKind::Positive,
                    GoalKind::Neg => NodeKind::Negative,
                    _ => NodeKind::Builtin,
                },
                clause: r.clause,
                children: Vec::new(),
            })
        })
        .collect();
    // children are created after their parent, so attach from the back
    let mut roots = Vec::new();
    for i in (0..recs.len()).rev() {
        let node = trees[i].take().unwrap();
        match m.proof_parent(&recs[i]) {
            Some(p) => trees[p].as_mut().unwrap().children.insert(0, node),
            None => roots.push(node),
        }
    }
    roots.reverse();
    roots
}

/// Solve a query against a program.
pub fn solve(p: &Program, query: &[Literal], budget: usize) -> Result<SldOutcome, SldError> {
    Sld::new(p).solve(query, budget)
}

#[cfg(test)]
mod tests;
