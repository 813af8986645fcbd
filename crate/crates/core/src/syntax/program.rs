use std::collections::BTreeSet;
use std::fmt;

use super::completion::{complete, PredicateDefinition};
use super::parser::{parse_statements, OpTable, Statement};
use super::term::{Atom, Clause, Literal, PredKey, Term};
use super::SyntaxError;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TypeExpr {
    Var(String),
    Con(String, Vec<TypeExpr>),
}

impl TypeExpr {
    pub fn from_term(t: &Term) -> TypeExpr {
        match t {
            Term::Var(v) => TypeExpr::Var(v.clone()),
            Term::App(f, args) => TypeExpr::Con(f.clone(), args.iter().map(TypeExpr::from_term).collect()),
        }
    }
}

impl fmt::Display for TypeExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeExpr::Var(v) => f.write_str(v),
            TypeExpr::Con(n, args) if args.is_empty() => f.write_str(n),
            TypeExpr::Con(n, args) => {
                let parts: Vec<String> = args.iter().map(|a| a.to_string()).collect();
                write!(f, "{}({})", n, parts.join(", "))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeDecl {
    pub name: String,
    pub params: Vec<String>,
    pub constructors: Vec<(String, Vec<TypeExpr>)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModeArg {
    In,
    Out,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mode(pub Vec<ModeArg>);

impl Mode {
    pub fn arity(&self) -> usize {
        self.0.len()
    }

    pub fn is_input(&self, i: usize) -> bool {
        self.0[i] == ModeArg::In
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<&str> = self
            .0
            .iter()
            .map(|m| match m {
                ModeArg::In => "in",
                ModeArg::Out => "out",
            })
            .collect();
        write!(f, "({})", parts.join(", "))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModeGroup {
    pub modes: Vec<Mode>,
}

impl fmt::Display for ModeGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.modes.iter().map(|m| m.to_string()).collect();
        f.write_str(&parts.join(" and "))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModeDecl {
    pub pred: PredKey,
    pub groups: Vec<ModeGroup>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PredDecl {
    pub pred: PredKey,
    pub arg_types: Vec<TypeExpr>,
}

/// A `predicate A precondition α postcondition ω` statement.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpecStatement {
    pub head: Atom,
    pub pre: Option<Term>,
    pub post: Option<Term>,
    pub line: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Declarations {
    pub types: Vec<TypeDecl>,
    pub preds: Vec<PredDecl>,
    pub modes: Vec<ModeDecl>,
    pub functors: Vec<(String, usize)>,
}

impl Declarations {
    pub fn type_decl(&self, name: &str, arity: usize) -> Option<&TypeDecl> {
        self.types.iter().find(|t| t.name == name && t.params.len() == arity)
    }

    pub fn pred_decl(&self, key: &PredKey) -> Option<&PredDecl> {
        self.preds.iter().find(|p| &p.pred == key)
    }

    pub fn mode_decl(&self, key: &PredKey) -> Option<&ModeDecl> {
        self.modes.iter().find(|m| &m.pred == key)
    }
}

#[derive(Clone, Debug, Default)]
pub struct Program {
    pub clauses: Vec<Clause>,
    pub decls: Declarations,
    pub specs: Vec<SpecStatement>,
    definitions: Vec<PredicateDefinition>,
}

impl Program {
    pub fn from_clauses(clauses: Vec<Clause>, decls: Declarations) -> Result<Program, SyntaxError> {
        let definitions = complete(&clauses)?;
        Ok(Program { clauses, decls, specs: Vec::new(), definitions })
    }

    pub fn definitions(&self) -> &[PredicateDefinition] {
        &self.definitions
    }

    pub fn definition(&self, key: &PredKey) -> Option<&PredicateDefinition> {
        self.definitions.iter().find(|d| &d.key == key)
    }

    pub fn clauses_for<'a>(&'a self, key: &'a PredKey) -> impl Iterator<Item = &'a Clause> + 'a {
        self.clauses.iter().filter(move |c| &c.head.key() == key)
    }

    /// Predicates defined or called, in first-appearance order. Equality and
    /// error/1 are excluded.
    pub fn predicates(&self) -> Vec<PredKey> {
        let mut out: Vec<PredKey> = Vec::new();
        let mut push = |k: PredKey| {
            if !k.is_eq() && !k.is_error() && !out.contains(&k) {
                out.push(k);
            }
        };
        for c in &self.clauses {
            push(c.head.key());
            for l in &c.body {
                push(l.atom().key());
            }
        }
        out
    }

    /// Function symbols occurring in clauses and in declarations.
    pub fn alphabet(&self) -> BTreeSet<(String, usize)> {
        let mut out = BTreeSet::new();
        for c in &self.clauses {
            c.head.args.iter().for_each(|a| a.functors_into(&mut out));
            for l in &c.body {
                l.atom().args.iter().for_each(|a| a.functors_into(&mut out));
            }
        }
        for s in &self.specs {
            s.head.args.iter().for_each(|a| a.functors_into(&mut out));
        }
        for t in &self.decls.types {
            for (c, args) in &t.constructors {
                out.insert((c.clone(), args.len()));
            }
        }
        out.extend(self.decls.functors.iter().cloned());
        out
    }

    pub fn has_negation(&self) -> bool {
        self.clauses.iter().any(|c| c.body.iter().any(Literal::is_neg))
    }

    /// Append the clauses and declarations of another program.
    pub fn extend(&mut self, other: Program) -> Result<(), SyntaxError> {
        self.clauses.extend(other.clauses);
        self.decls.types.extend(other.decls.types);
        self.decls.preds.extend(other.decls.preds);
        self.decls.modes.extend(other.decls.modes);
        self.decls.functors.extend(other.decls.functors);
        self.specs.extend(other.specs);
        self.definitions = complete(&self.clauses)?;
        Ok(())
    }
}

pub fn parse_program(src: &str) -> Result<Program, SyntaxError> {
    let stmts = parse_statements(src, &OpTable::program())?;
    program_from_statements(stmts)
}

pub(crate) fn program_from_statements(stmts: Vec<Statement>) -> Result<Program, SyntaxError> {
    let mut clauses = Vec::new();
    let mut decls = Declarations::default();
    let mut specs = Vec::new();
    for st in stmts {
        let line = st.line;
        match &st.term {
            Term::App(op, args) if op == ":-" && args.len() == 1 => {
                directive(&args[0], line, &mut decls)?;
            }
            Term::App(op, args) if op == "predicate" && args.len() == 1 => {
                specs.push(spec_statement(&args[0], line)?);
            }
            Term::App(op, args) if op == ":-" && args.len() == 2 => {
                let head = head_atom(&args[0], line)?;
                for body in body_dnf(&args[1], line)? {
                    clauses.push(Clause { head: head.clone(), body, line });
                }
            }
            t => {
                let head = head_atom(t, line)?;
                clauses.push(Clause { head, body: Vec::new(), line });
            }
        }
    }
    let mut p = Program::from_clauses(clauses, decls)?;
    p.specs = specs;
    Ok(p)
}

fn err(line: usize, msg: impl Into<String>) -> SyntaxError {
    SyntaxError::new(line, 1, msg)
}

fn head_atom(t: &Term, line: usize) -> Result<Atom, SyntaxError> {
    match t {
        Term::App(f, args) => {
            let a = Atom::new(f.clone(), args.clone());
            if a.is_eq() {
                return Err(err(line, "equality is reserved and cannot be defined"));
            }
            if a.is_error() {
                return Err(err(line, "error/1 is reserved and cannot be defined"));
            }
            if f.chars().next().is_some_and(|c| c.is_ascii_digit()) {
                return Err(err(line, format!("a number cannot head a clause: {}", f)));
            }
            Ok(a)
        }
        Term::Var(v) => Err(err(line, format!("variable {} cannot head a clause", v))),
    }
}

/// Disjunctive normal form of a clause body.
pub fn body_dnf(t: &Term, line: usize) -> Result<Vec<Vec<Literal>>, SyntaxError> {
    match t {
        Term::App(op, a) if op == "," && a.len() == 2 => {
            let l = body_dnf(&a[0], line)?;
            let r = body_dnf(&a[1], line)?;
            let mut out = Vec::new();
            for x in &l {
                for y in &r {
                    let mut c = x.clone();
                    c.extend(y.iter().cloned());
                    out.push(c);
                }
            }
            Ok(out)
        }
        Term::App(op, a) if op == ";" && a.len() == 2 => {
            let mut l = body_dnf(&a[0], line)?;
            l.extend(body_dnf(&a[1], line)?);
            Ok(l)
        }
        Term::App(op, a) if a.is_empty() && op == "true" => Ok(vec![vec![]]),
        Term::App(op, a) if a.is_empty() && (op == "fail" || op == "false") => Ok(vec![]),
        Term::App(op, a) if (op == "not" || op == "\\+") && a.len() == 1 => {
            let inner = body_dnf(&a[0], line)?;
            match inner.as_slice() {
                [conj] if conj.len() == 1 && !conj[0].is_neg() => Ok(vec![vec![Literal::Neg(conj[0].atom().clone())]]),
                _ => Err(err(line, "negation applies only to an atom or an equality")),
            }
        }
        Term::App(op, a) if op == "\\=" && a.len() == 2 => {
            Ok(vec![vec![Literal::Neg(Atom::eq(a[0].clone(), a[1].clone()))]])
        }
        Term::App(f, args) => {
            if f.chars().next().is_some_and(|c| c.is_ascii_digit()) {
                return Err(err(line, format!("a number is not a goal: {}", f)));
            }
            Ok(vec![vec![Literal::Pos(Atom::new(f.clone(), args.clone()))]])
        }
        Term::Var(v) => Err(err(line, format!("variable goal {} is not supported", v))),
    }
}

fn flatten<'a>(t: &'a Term, op: &str, out: &mut Vec<&'a Term>) {
    match t {
        Term::App(f, a) if f == op && a.len() == 2 => {
            flatten(&a[0], op, out);
            flatten(&a[1], op, out);
        }
        _ => out.push(t),
    }
}

fn directive(t: &Term, line: usize, decls: &mut Declarations) -> Result<(), SyntaxError> {
    let Term::App(kind, args) = t else {
        return Err(err(line, "malformed directive"));
    };
    match (kind.as_str(), args.len()) {
        ("type", 1) => {
            let td = type_decl(&args[0], line)?;
            if decls.type_decl(&td.name, td.params.len()).is_some() {
                return Err(err(line, format!("duplicate declaration of type {}", td.name)));
            }
            decls.types.push(td);
        }
        ("pred", 1) => {
            let Term::App(p, types) = &args[0] else {
                return Err(err(line, "malformed pred declaration"));
            };
            let key = PredKey::new(p.clone(), types.len());
            if decls.pred_decl(&key).is_some() {
                return Err(err(line, format!("duplicate pred declaration for {}", key)));
            }
            decls.preds.push(PredDecl { pred: key, arg_types: types.iter().map(TypeExpr::from_term).collect() });
        }
        ("mode", 1) => {
            let md = mode_decl(&args[0], line)?;
            if decls.mode_decl(&md.pred).is_some() {
                return Err(err(line, format!("duplicate mode declaration for {}", md.pred)));
            }
            decls.modes.push(md);
        }
        ("functors", 1) => {
            let mut items = Vec::new();
            flatten(&args[0], ",", &mut items);
            for it in items {
                match it {
                    Term::App(s, a) if s == "/" && a.len() == 2 => match (&a[0], &a[1]) {
                        (Term::App(name, n0), Term::App(ar, n1)) if n0.is_empty() && n1.is_empty() => {
                            let arity: usize =
                                ar.parse().map_err(|_| err(line, format!("bad arity in functors: {}", ar)))?;
                            decls.functors.push((name.clone(), arity));
                        }
                        _ => return Err(err(line, "functors items are Name/Arity or constants")),
                    },
                    Term::App(name, a) if a.is_empty() => decls.functors.push((name.clone(), 0)),
                    _ => return Err(err(line, "functors items are Name/Arity or constants")),
                }
            }
        }
        _ => return Err(err(line, format!("unknown directive {}", kind))),
    }
    Ok(())
}

fn type_decl(t: &Term, line: usize) -> Result<TypeDecl, SyntaxError> {
    let Term::App(arrow, a) = t else {
        return Err(err(line, "malformed type declaration"));
    };
    if arrow != "--->" || a.len() != 2 {
        return Err(err(line, "type declaration needs --->"));
    }
    let Term::App(name, params) = &a[0] else {
        return Err(err(line, "malformed type name"));
    };
    let params = params
        .iter()
        .map(|p| match p {
            Term::Var(v) => Ok(v.clone()),
            _ => Err(err(line, "type parameters must be variables")),
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut alts = Vec::new();
    flatten(&a[1], ";", &mut alts);
    let mut constructors: Vec<(String, Vec<TypeExpr>)> = Vec::new();
    for alt in alts {
        let Term::App(c, cargs) = alt else {
            return Err(err(line, "constructor must be a name"));
        };
        if constructors.iter().any(|(n, xs)| n == c && xs.len() == cargs.len()) {
            return Err(err(line, format!("duplicate constructor {} in type {}", c, name)));
        }
        constructors.push((c.clone(), cargs.iter().map(TypeExpr::from_term).collect()));
    }
    Ok(TypeDecl { name: name.clone(), params, constructors })
}

fn mode_of(t: &Term, line: usize) -> Result<Vec<ModeArg>, SyntaxError> {
    let mut items = Vec::new();
    flatten(t, ",", &mut items);
    items
        .into_iter()
        .map(|m| match m {
            Term::App(n, a) if a.is_empty() && n == "in" => Ok(ModeArg::In),
            Term::App(n, a) if a.is_empty() && n == "out" => Ok(ModeArg::Out),
            _ => Err(err(line, "mode arguments are in or out")),
        })
        .collect()
}

fn mode_decl(t: &Term, line: usize) -> Result<ModeDecl, SyntaxError> {
    let mut groups_t = Vec::new();
    flatten(t, "also", &mut groups_t);
    let mut pred: Option<PredKey> = None;
    let mut groups = Vec::new();
    for g in groups_t {
        let mut modes_t = Vec::new();
        flatten(g, "and", &mut modes_t);
        let mut modes = Vec::new();
        for m in modes_t {
            let margs = match m {
                Term::App(n, a) if n != "," && n != "in" && n != "out" && !a.is_empty() => {
                    let k = PredKey::new(n.clone(), a.len());
                    match &pred {
                        None => pred = Some(k),
                        Some(p) if *p != k => {
                            return Err(err(line, format!("mode declaration mixes {} and {}", p, k)))
                        }
                        _ => {}
                    }
                    a.iter().map(|x| mode_of(x, line)).collect::<Result<Vec<_>, _>>()?.concat()
                }
                other => mode_of(other, line)?,
            };
            modes.push(Mode(margs));
        }
        groups.push(ModeGroup { modes });
    }
    let pred = pred.ok_or_else(|| err(line, "mode declaration names no predicate"))?;
    for g in &groups {
        for m in &g.modes {
            if m.arity() != pred.arity {
                return Err(err(line, format!("mode {} does not match arity of {}", m, pred)));
            }
        }
    }
    Ok(ModeDecl { pred, groups })
}

fn spec_statement(t: &Term, line: usize) -> Result<SpecStatement, SyntaxError> {
    let (rest, post) = match t {
        Term::App(op, a) if op == "postcondition" && a.len() == 2 => (&a[0], Some(a[1].clone())),
        _ => (t, None),
    };
    let (head_t, pre) = match rest {
        Term::App(op, a) if op == "precondition" && a.len() == 2 => (&a[0], Some(a[1].clone())),
        _ => (rest, None),
    };
    let head = head_atom(head_t, line)?;
    let mut seen = Vec::new();
    for a in &head.args {
        match a {
            Term::Var(v) if !seen.contains(v) => seen.push(v.clone()),
            _ => return Err(err(line, "specified atom must have distinct variable arguments")),
        }
    }
    Ok(SpecStatement { head, pre, post, line })
}
