//! Intensional interpretations: ordered rules `value Pattern [when Guard]`
//! and a mandatory `default value`.
//!
//! A guard is a clause body. Literals `X : Type` test structural membership
//! in a declared type (type variables accept anything); other literals are
//! goals run by resolution against the helper clauses of the file. Type tests
//! need their term ground once the pattern has matched and are checked before
//! the goals. Files may declare types with `:- type` and define helper
//! predicates with ordinary clauses, except ones named u, f, t, i or default.

use std::fmt;
use std::sync::Arc;

use crate::bilattice::TruthValue4;
use crate::sld::{Sld, Verdict, DEFAULT_BUDGET};
use crate::syntax::{
    body_dnf, match_atom, parse_statements, Atom, Declarations, Fixity, Literal, OpTable, PredKey, Program, Statement,
    Term, TypeExpr, Universe,
};

use super::{ExtensionalInterpretation, InterpError, InterpretationView};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PatternRule {
    pub value: TruthValue4,
    pub pattern: Atom,
    /// Disjunctive normal form; empty conjunction list means no guard.
    pub guard: Option<Vec<Vec<Literal>>>,
    pub line: usize,
}

impl fmt::Display for PatternRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.value, self.pattern)?;
        if let Some(g) = &self.guard {
            let parts: Vec<String> = g.iter().map(|c| crate::syntax::conj_to_string(c)).collect();
            write!(f, " when {}", parts.join(" ; "))?;
        }
        Ok(())
    }
}

pub struct PatternInterpretation {
    rules: Vec<PatternRule>,
    default: TruthValue4,
    decls: Declarations,
    sld: Sld,
    helpers: Program,
    budget: usize,
}

impl fmt::Debug for PatternInterpretation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PatternInterpretation").field("rules", &self.rules).field("default", &self.default).finish()
    }
}

fn ops() -> OpTable {
    let mut t = OpTable::interpretation();
    t.add(":", Fixity::Xfx, 200);
    t
}

fn format_err(line: usize, msg: impl Into<String>) -> InterpError {
    InterpError::Format { line, msg: msg.into() }
}

impl PatternInterpretation {
    pub fn new(rules: Vec<PatternRule>, default: TruthValue4, decls: Declarations, helpers: Program) -> Self {
        let sld = Sld::new(&helpers);
        PatternInterpretation { rules, default, decls, sld, helpers, budget: DEFAULT_BUDGET }
    }

    pub fn parse(src: &str) -> Result<Self, InterpError> {
        let stmts = parse_statements(src, &ops())?;
        let mut rules = Vec::new();
        let mut default = None;
        let mut other: Vec<Statement> = Vec::new();
        for st in stmts {
            let line = st.line;
            match &st.term {
                Term::App(v, a) if v == "default" && a.len() == 1 => {
                    let Term::App(name, none) = &a[0] else {
                        return Err(format_err(line, "default needs a truth value"));
                    };
                    let val: TruthValue4 = name.parse().map_err(|_| format_err(line, format!("bad truth value {}", name)))?;
                    if !none.is_empty() {
                        return Err(format_err(line, "default needs a truth value"));
                    }
                    if default.replace(val).is_some() {
                        return Err(format_err(line, "more than one default"));
                    }
                }
                Term::App(v, a) if a.len() == 1 && matches!(v.as_str(), "u" | "f" | "t" | "i") => {
                    let value: TruthValue4 = v.parse().unwrap();
                    let (pat, guard) = match &a[0] {
                        Term::App(w, ga) if w == "when" && ga.len() == 2 => (&ga[0], Some(body_dnf(&ga[1], line)?)),
                        t => (t, None),
                    };
                    let pattern = Atom::from_term(pat).ok_or_else(|| format_err(line, "pattern must be an atom"))?;
                    rules.push(PatternRule { value, pattern, guard, line });
                }
                _ => other.push(st),
            }
        }
        let default = default.ok_or_else(|| format_err(0, "missing `default` line"))?;
        let helpers = crate::syntax::program_from_statements(other)?;
        let pi = PatternInterpretation::new(rules, default, helpers.decls.clone(), helpers);
        pi.check_types()?;
        Ok(pi)
    }

    fn check_types(&self) -> Result<(), InterpError> {
        for r in &self.rules {
            for c in r.guard.iter().flatten() {
                for l in c {
                    if let Some((_, ty)) = type_test(l.atom()) {
                        if !self.decls.type_is_known(&ty) {
                            return Err(format_err(r.line, format!("undeclared type {}", ty)));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn with_budget(mut self, budget: usize) -> Self {
        self.budget = budget;
        self
    }

    pub fn rules(&self) -> &[PatternRule] {
        &self.rules
    }

    pub fn default_value(&self) -> TruthValue4 {
        self.default
    }

    pub fn decls(&self) -> &Declarations {
        &self.decls
    }

    pub fn helpers(&self) -> &Program {
        &self.helpers
    }

    /// Symbols the rules and helper clauses mention, for building carriers.
    pub fn alphabet(&self) -> std::collections::BTreeSet<(String, usize)> {
        let mut out = self.helpers.alphabet();
        for r in &self.rules {
            r.pattern.args.iter().for_each(|a| a.functors_into(&mut out));
        }
        out
    }

    /// Predicates that have a rule.
    pub fn predicates(&self) -> Vec<PredKey> {
        let mut out: Vec<PredKey> = Vec::new();
        for r in &self.rules {
            let k = r.pattern.key();
            if !out.contains(&k) {
                out.push(k);
            }
        }
        out
    }

    fn guard_holds(&self, rule: &PatternRule, s: &crate::syntax::Substitution) -> Result<bool, InterpError> {
        let Some(dnf) = &rule.guard else { return Ok(true) };
        'disjuncts: for conj in dnf {
            let mut goals = Vec::new();
            for l in conj {
                let l = l.apply(s);
                if let Some((t, ty)) = type_test(l.atom()) {
                    if !t.is_ground() {
                        return Err(InterpError::Guard { line: rule.line, msg: format!("type test on unbound {}", t) });
                    }
                    if self.decls.has_type(&t, &ty) == l.is_neg() {
                        continue 'disjuncts;
                    }
                } else {
                    goals.push(l);
                }
            }
            if goals.is_empty() {
                return Ok(true);
            }
            match self.sld.decide(&goals, self.budget) {
                Ok(Verdict::Succeeds) => return Ok(true),
                Ok(Verdict::FinitelyFails) => {}
                Ok(v) => return Err(InterpError::Guard { line: rule.line, msg: format!("{:?}", v) }),
                Err(e) => return Err(InterpError::Guard { line: rule.line, msg: e.to_string() }),
            }
        }
        Ok(false)
    }

    /// Tabulate over a carrier for the given predicates.
    pub fn materialize(&self, carrier: Arc<Universe>, preds: &[PredKey]) -> Result<ExtensionalInterpretation, InterpError> {
        let mut out = ExtensionalInterpretation::bottom(carrier, preds)?;
        for p in 0..preds.len() {
            for o in 0..out.table(p).len() {
                let a = out.atom_at(p, o);
                let v = self.lookup(&a)?;
                out.table_mut(p)[o] = v;
            }
        }
        Ok(out)
    }
}

fn type_test(a: &Atom) -> Option<(Term, TypeExpr)> {
    (a.pred == ":" && a.args.len() == 2).then(|| (a.args[0].clone(), TypeExpr::from_term(&a.args[1])))
}

impl InterpretationView for PatternInterpretation {
    fn lookup(&self, a: &Atom) -> Result<TruthValue4, InterpError> {
        for r in &self.rules {
            if let Some(s) = match_atom(&r.pattern, a) {
                if self.guard_holds(r, &s)? {
                    return Ok(r.value);
                }
            }
        }
        Ok(self.default)
    }
}
