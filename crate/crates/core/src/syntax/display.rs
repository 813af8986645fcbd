//! Canonical printing. Applications are written in prefix form, lists with
//! bracket notation, and names are quoted unless they are plain identifiers,
//! integers or `[]`.

use std::fmt;

use super::term::{Atom, Literal, Term, CONS, NIL};

pub fn needs_quotes(name: &str) -> bool {
    if name == NIL {
        return false;
    }
    let mut cs = name.chars();
    match cs.next() {
        None => true,
        Some(c) if c.is_ascii_digit() => !name.chars().all(|c| c.is_ascii_digit()),
        Some(c) if c.is_lowercase() => !name.chars().all(|c| c.is_alphanumeric() || c == '_'),
        Some(_) => true,
    }
}

pub fn write_name(f: &mut impl fmt::Write, name: &str) -> fmt::Result {
    if needs_quotes(name) {
        f.write_char('\'')?;
        for c in name.chars() {
            match c {
                '\'' => f.write_str("\\'")?,
                '\\' => f.write_str("\\\\")?,
                '\n' => f.write_str("\\n")?,
                c => f.write_char(c)?,
            }
        }
        f.write_char('\'')
    } else {
        f.write_str(name)
    }
}

fn write_term(f: &mut impl fmt::Write, t: &Term) -> fmt::Result {
    match t {
        Term::Var(v) => f.write_str(v),
        Term::App(name, args) if name == CONS && args.len() == 2 => {
            f.write_char('[')?;
            write_term(f, &args[0])?;
            let mut tail = &args[1];
            loop {
                match tail {
                    Term::App(n, a) if n == CONS && a.len() == 2 => {
                        f.write_char(',')?;
                        write_term(f, &a[0])?;
                        tail = &a[1];
                    }
                    Term::App(n, a) if n == NIL && a.is_empty() => break,
                    other => {
                        f.write_char('|')?;
                        write_term(f, other)?;
                        break;
                    }
                }
            }
            f.write_char(']')
        }
        Term::App(name, args) => {
            write_name(f, name)?;
            if !args.is_empty() {
                f.write_char('(')?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_char(',')?;
                    }
                    write_term(f, a)?;
                }
                f.write_char(')')?;
            }
            Ok(())
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_term(f, self)
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_eq() {
            write_term(f, &self.args[0])?;
            f.write_char('=')?;
            return write_term(f, &self.args[1]);
        }
        write_term(f, &self.as_term())
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Pos(a) => write!(f, "{}", a),
            Literal::Neg(a) => write!(f, "not({})", a),
        }
    }
}

pub fn conj_to_string(lits: &[Literal]) -> String {
    if lits.is_empty() {
        return "true".into();
    }
    lits.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(", ")
}

use std::fmt::Write as _;

pub fn term_string(t: &Term) -> String {
    let mut s = String::new();
    let _ = write!(s, "{}", t);
    s
}
