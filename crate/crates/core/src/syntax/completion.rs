//! Grouping the clauses of each predicate into a single definition.

use std::fmt;

use super::display::conj_to_string;
use super::term::{Atom, Clause, Literal, PredKey, Substitution, Term};
use super::SyntaxError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Disjunct {
    pub literals: Vec<Literal>,
    /// Index of the source clause in the program.
    pub clause: usize,
}

/// `H :- ∃W [C1 ∨ … ∨ Cn]` with H in most general form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PredicateDefinition {
    pub key: PredKey,
    pub head_vars: Vec<String>,
    pub local_vars: Vec<String>,
    pub disjuncts: Vec<Disjunct>,
}

impl PredicateDefinition {
    pub fn head(&self) -> Atom {
        Atom::new(self.key.name.clone(), self.head_vars.iter().map(|v| Term::var(v.clone())).collect())
    }

    /// Head instance at the given ground arguments.
    pub fn ground_at(&self, args: &[Term]) -> Result<(Atom, Body), GroundingError> {
        if args.len() != self.head_vars.len() {
            return Err(GroundingError::Arity);
        }
        let theta = Substitution::from_pairs(self.head_vars.iter().cloned().zip(args.iter().cloned()));
        head_grounding(self, &theta)
    }
}

impl fmt::Display for PredicateDefinition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.head())?;
        write!(f, " :- {}", Body { locals: self.local_vars.clone(), disjuncts: self.disjuncts.iter().map(|d| d.literals.clone()).collect() })
    }
}

/// An existentially closed disjunction of conjunctions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Body {
    pub locals: Vec<String>,
    pub disjuncts: Vec<Vec<Literal>>,
}

impl fmt::Display for Body {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let inner = if self.disjuncts.is_empty() {
            "false".to_string()
        } else {
            self.disjuncts.iter().map(|c| conj_to_string(c)).collect::<Vec<_>>().join(" ; ")
        };
        if self.locals.is_empty() {
            f.write_str(&inner)
        } else {
            write!(f, "ex [{}] ({})", self.locals.join(","), inner)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GroundingError {
    #[error("substitution binds local variable {0}")]
    BindsLocal(String),
    #[error("substitution leaves head variable {0} unbound")]
    HeadUnbound(String),
    #[error("substitution does not ground head variable {0}")]
    NotGround(String),
    #[error("wrong number of arguments")]
    Arity,
}

/// `(Hθ, Bθ)` for a θ that grounds exactly the head variables.
pub fn head_grounding(def: &PredicateDefinition, theta: &Substitution) -> Result<(Atom, Body), GroundingError> {
    for v in theta.domain() {
        if def.local_vars.contains(v) {
            return Err(GroundingError::BindsLocal(v.clone()));
        }
    }
    for v in &def.head_vars {
        match theta.get(v) {
            None => return Err(GroundingError::HeadUnbound(v.clone())),
            Some(t) if !t.is_ground() => return Err(GroundingError::NotGround(v.clone())),
            _ => {}
        }
    }
    let head = def.head().apply(theta);
    let disjuncts = def.disjuncts.iter().map(|d| d.literals.iter().map(|l| l.apply(theta)).collect()).collect();
    Ok((head, Body { locals: def.local_vars.clone(), disjuncts }))
}

fn head_var_name(i: usize) -> String {
    format!("V{}", i + 1)
}

/// Complete every predicate. A head argument that is the first occurrence of
/// a variable is identified with the head variable; other head arguments
/// become equalities.
pub fn complete(clauses: &[Clause]) -> Result<Vec<PredicateDefinition>, SyntaxError> {
    let mut defs: Vec<PredicateDefinition> = Vec::new();
    for (ci, clause) in clauses.iter().enumerate() {
        let key = clause.head.key();
        if let Some(d) = defs.iter().find(|d| d.key.name == key.name && d.key.arity != key.arity) {
            return Err(SyntaxError::new(
                clause.line,
                1,
                format!("arity clash: {} and {}", d.key, key),
            ));
        }
        let n = key.arity;
        let head_names: Vec<String> = (0..n).map(head_var_name).collect();
        // rename clause variables that collide with generated head names
        let clause = clause.rename(&mut |v| {
            if head_names.iter().any(|h| h == v) {
                format!("{}_{}", v, ci)
            } else {
                v.to_string()
            }
        });
        let mut rename = Substitution::new();
        let mut eqs = Vec::new();
        for (i, arg) in clause.head.args.iter().enumerate() {
            match arg {
                Term::Var(v) if !rename.contains(v) => rename.bind(v.clone(), Term::var(head_names[i].clone())),
                _ => eqs.push((i, arg.clone())),
            }
        }
        let mut literals: Vec<Literal> = eqs
            .into_iter()
            .map(|(i, t)| Literal::Pos(Atom::eq(Term::var(head_names[i].clone()), rename.apply(&t))))
            .collect();
        literals.extend(clause.body.iter().map(|l| l.apply(&rename)));

        let def = match defs.iter_mut().position(|d| d.key == key) {
            Some(p) => &mut defs[p],
            None => {
                defs.push(PredicateDefinition {
                    key: key.clone(),
                    head_vars: head_names.clone(),
                    local_vars: Vec::new(),
                    disjuncts: Vec::new(),
                });
                defs.last_mut().unwrap()
            }
        };
        for l in &literals {
            for v in l.atom().vars() {
                if !head_names.contains(&v) && !def.local_vars.contains(&v) {
                    def.local_vars.push(v);
                }
            }
        }
        def.disjuncts.push(Disjunct { literals, clause: ci });
    }
    Ok(defs)
}
