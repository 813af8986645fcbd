//! Declarative debugging with four-valued intended interpretations.
//!
//! A wrong answer is debugged over its proof tree, where u counts as f. A
//! missing answer is debugged over the failure tree, where u counts as t.
//! The search is top-down and descends into the first erroneous child.

mod protocol;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bilattice::{and4, neg4, or4, TruthValue4, F, I, T};
use crate::interp::{InterpError, InterpretationView};
use crate::sld::{FailureChild, FailureTree, NodeKind, ProofTree, Sld, SldError, SldOutcome};
use crate::syntax::{Atom, Literal, Program};

pub use protocol::{serve_tcp, JsonOracle, Message, ReplayOracle};


#[derive(Debug, thiserror::Error)]
pub enum DebugError {
    #[error(transparent)]
    Interp(#[from] InterpError),
    #[error(transparent)]
    Sld(#[from] SldError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("protocol violation: {0}")]
    Protocol(String),
    #[error("the oracle did not answer in time")]
    Timeout,
    #[error("the oracle disconnected")]
    Disconnected,
    #[error("{0}")]
    Query(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Diagnosis {
    WrongAnswer,
    MissingAnswer,
}

impl FromStr for Diagnosis {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "wrong_answer" | "wrong" => Ok(Diagnosis::WrongAnswer),
            "missing_answer" | "missing" => Ok(Diagnosis::MissingAnswer),
            _ => Err(format!("unknown diagnosis {}", s)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeClass {
    Correct,
    Erroneous,
    Inadmissible,
}

impl fmt::Display for NodeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NodeClass::Correct => "correct",
            NodeClass::Erroneous => "erroneous",
            NodeClass::Inadmissible => "inadmissible",
        })
    }
}

impl FromStr for NodeClass {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "correct" => Ok(NodeClass::Correct),
            "erroneous" => Ok(NodeClass::Erroneous),
            "inadmissible" => Ok(NodeClass::Inadmissible),
            _ => Err(format!("unknown class {}", s)),
        }
    }
}

/// Class of a node whose literal has intended value `v`.
pub fn classify(v: TruthValue4, d: Diagnosis) -> NodeClass {
    match (d, v) {
        (_, I) => NodeClass::Inadmissible,
        (Diagnosis::WrongAnswer, T) | (Diagnosis::MissingAnswer, F) => NodeClass::Correct,
        _ => NodeClass::Erroneous,
    }
}

/// A node of the computation tree. Negated nodes are leaves.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DebugTree {
    pub id: usize,
    pub atom: Atom,
    pub negated: bool,
    /// Source line of the clause that resolved the node.
    pub line: Option<usize>,
    pub children: Vec<DebugTree>,
}

impl DebugTree {
    /// Canonical text of the node's literal.
    pub fn literal(&self) -> String {
        if self.negated {
            format!("not({})", self.atom)
        } else {
            self.atom.to_string()
        }
    }

    pub fn size(&self) -> usize {
        1 + self.children.iter().map(DebugTree::size).sum::<usize>()
    }

    pub fn from_proof(t: &ProofTree, p: &Program) -> DebugTree {
        let mut next = 0;
        proof_node(t, p, &mut next)
    }

    pub fn from_failure(t: &FailureTree) -> DebugTree {
        let mut next = 0;
        failure_node(t, &mut next)
    }
}

fn proof_node(t: &ProofTree, p: &Program, next: &mut usize) -> DebugTree {
    let id = *next;
    *next += 1;
    let negated = t.kind == NodeKind::Negative;
    let children = if negated {
        Vec::new()
    } else {
        t.children.iter().filter(|c| c.kind != NodeKind::Builtin).map(|c| proof_node(c, p, next)).collect()
    };
    let line = t.clause.and_then(|c| p.clauses.get(c)).map(|c| c.line);
    DebugTree { id, atom: t.atom.clone(), negated, line, children }
}

fn failure_node(t: &FailureTree, next: &mut usize) -> DebugTree {
    let id = *next;
    *next += 1;
    let mut children = Vec::new();
    for c in t.children() {
        match c {
            FailureChild::Failed(sub) => children.push(failure_node(sub, next)),
            FailureChild::NegSucceeded { atom, .. } => {
                children.push(DebugTree { id: *next, atom: atom.clone(), negated: true, line: None, children: Vec::new() });
                *next += 1;
            }
        }
    }
    DebugTree { id, atom: t.atom.clone(), negated: false, line: None, children }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Answer {
    Class(NodeClass),
    Value(TruthValue4),
}

pub trait Oracle {
    fn ask(&mut self, node: &DebugTree, kind: Diagnosis) -> Result<Answer, DebugError>;
}

/// Answers from an intended interpretation.
pub struct StoredOracle<'a> {
    pub intended: &'a dyn InterpretationView,
}

impl Oracle for StoredOracle<'_> {
    fn ask(&mut self, node: &DebugTree, _: Diagnosis) -> Result<Answer, DebugError> {
        let v = self.intended.value_of(&node.atom)?;
        Ok(Answer::Value(if node.negated { neg4(v) } else { v }))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BugKind {
    #[serde(rename = "e-bug")]
    EBug,
    #[serde(rename = "i-bug")]
    IBug,
}

impl fmt::Display for BugKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BugKind::EBug => "e-bug",
            BugKind::IBug => "i-bug",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChildClass {
    pub atom: String,
    pub class: NodeClass,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BugReport {
    pub kind: BugKind,
    pub node: usize,
    pub atom: String,
    pub line: Option<usize>,
    /// The node with its children as a clause instance.
    pub instance: String,
    pub children: Vec<ChildClass>,
    /// Intended values of the head and of the body, when the oracle gave
    /// values rather than classes.
    pub head: Option<TruthValue4>,
    pub body: Option<TruthValue4>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DebugOutcome {
    Bug(BugReport),
    /// The root is not erroneous. `inadmissible` is set when the query itself
    /// is inadmissible.
    NoBug { inadmissible: bool },
}

/// One debugging run: caches answers per literal and records the dialogue.
pub struct Session<'a> {
    oracle: &'a mut dyn Oracle,
    kind: Diagnosis,
    cache: HashMap<String, Answer>,
    pub transcript: Vec<Message>,
}

impl<'a> Session<'a> {
    pub fn new(oracle: &'a mut dyn Oracle, kind: Diagnosis) -> Session<'a> {
        Session { oracle, kind, cache: HashMap::new(), transcript: Vec::new() }
    }

    fn answer(&mut self, node: &DebugTree) -> Result<Answer, DebugError> {
        let key = node.literal();
        if let Some(a) = self.cache.get(&key) {
            return Ok(*a);
        }
        self.transcript.push(Message::Ask { id: node.id, atom: key.clone(), kind: self.kind });
        let a = self.oracle.ask(node, self.kind)?;
        self.transcript.push(Message::answer(node.id, a));
        self.cache.insert(key, a);
        Ok(a)
    }

    fn class(&mut self, node: &DebugTree) -> Result<NodeClass, DebugError> {
        Ok(match self.answer(node)? {
            Answer::Class(c) => c,
            Answer::Value(v) => classify(v, self.kind),
        })
    }

    fn value(&self, node: &DebugTree) -> Option<TruthValue4> {
        match self.cache.get(&node.literal()) {
            Some(Answer::Value(v)) => Some(*v),
            _ => None,
        }
    }

    pub fn find_bug(&mut self, tree: &DebugTree) -> Result<DebugOutcome, DebugError> {
        let outcome = self.search(tree)?;
        self.transcript.push(Message::outcome(&outcome));
        Ok(outcome)
    }

    fn search(&mut self, tree: &DebugTree) -> Result<DebugOutcome, DebugError> {
        match self.class(tree)? {
            NodeClass::Correct => return Ok(DebugOutcome::NoBug { inadmissible: false }),
            NodeClass::Inadmissible => return Ok(DebugOutcome::NoBug { inadmissible: true }),
            NodeClass::Erroneous => {}
        }
        let mut cur = tree;
        'descend: loop {
            let mut classes = Vec::with_capacity(cur.children.len());
            for c in &cur.children {
                let class = self.class(c)?;
                if class == NodeClass::Erroneous {
                    cur = c;
                    continue 'descend;
                }
                classes.push(class);
            }
            return Ok(DebugOutcome::Bug(self.report(cur, &classes)));
        }
    }

    fn report(&self, node: &DebugTree, classes: &[NodeClass]) -> BugReport {
        let kind = if classes.contains(&NodeClass::Inadmissible) { BugKind::IBug } else { BugKind::EBug };
        let children: Vec<ChildClass> =
            node.children.iter().zip(classes).map(|(c, &class)| ChildClass { atom: c.literal(), class }).collect();
        let values: Option<Vec<TruthValue4>> = node.children.iter().map(|c| self.value(c)).collect();
        let body = values.map(|vs| match self.kind {
            Diagnosis::WrongAnswer => vs.into_iter().fold(T, and4),
            Diagnosis::MissingAnswer => vs.into_iter().fold(F, or4),
        });
        let sep = match self.kind {
            Diagnosis::WrongAnswer => ", ",
            Diagnosis::MissingAnswer => " ; ",
        };
        let lits: Vec<String> = node.children.iter().map(DebugTree::literal).collect();
        let instance = if lits.is_empty() {
            format!("{}.", node.literal())
        } else {
            format!("{} :- {}.", node.literal(), lits.join(sep))
        };
        BugReport {
            kind,
            node: node.id,
            atom: node.literal(),
            line: node.line,
            instance,
            children,
            head: self.value(node),
            body,
        }
    }
}

pub fn find_bug(tree: &DebugTree, oracle: &mut dyn Oracle, kind: Diagnosis) -> Result<DebugOutcome, DebugError> {
    Session::new(oracle, kind).find_bug(tree)
}

/// The tree to debug for a query: the proof of its first answer for a
/// wrong answer, the failure tree of a ground atom for a missing answer.
pub fn build_tree(p: &Program, query: &Atom, kind: Diagnosis, budget: usize) -> Result<DebugTree, DebugError> {
    let sld = Sld::new(p);
    match kind {
        Diagnosis::WrongAnswer => match sld.solve(&[Literal::Pos(query.clone())], budget)? {
            SldOutcome::Succeeds { mut proofs, .. } => {
                let t = proofs.remove(0);
                if !t.atom.is_ground() {
                    return Err(DebugError::Query(format!("the answer {} is not ground", t.atom)));
                }
                Ok(DebugTree::from_proof(&t, p))
            }
            SldOutcome::FinitelyFails(_) => Err(DebugError::Query(format!("{} has no answer", query))),
            SldOutcome::BudgetExceeded => Err(SldError::BudgetExceeded.into()),
            SldOutcome::AbortedByError(t) => Err(SldError::Aborted(t).into()),
        },
        Diagnosis::MissingAnswer => {
            if !query.is_ground() {
                return Err(DebugError::Query("a missing answer query must be ground".into()));
            }
            Ok(DebugTree::from_failure(&sld.build_failure_tree(query, budget)?))
        }
    }
}

/// Value of a body pattern `head:-body` for the report, e.g. `u:-t`.
pub fn pattern(r: &BugReport) -> Option<String> {
    Some(format!("{}:-{}", r.head?, r.body?))
}
