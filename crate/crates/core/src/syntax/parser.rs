//! Operator precedence parser over a fixed operator table.

use std::collections::HashMap;

use super::lexer::{tokenize, Tok, Token};
use super::term::Term;
use super::SyntaxError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fixity {
    Fx,
    Fy,
    Xfx,
    Xfy,
    Yfx,
}

#[derive(Clone, Debug, Default)]
pub struct OpTable {
    prefix: HashMap<String, (u16, u16)>,
    infix: HashMap<String, (u16, u16, u16)>,
}

impl OpTable {
    pub fn add(&mut self, name: &str, fixity: Fixity, p: u16) {
        match fixity {
            Fixity::Fx => {
                self.prefix.insert(name.into(), (p, p - 1));
            }
            Fixity::Fy => {
                self.prefix.insert(name.into(), (p, p));
            }
            Fixity::Xfx => {
                self.infix.insert(name.into(), (p, p - 1, p - 1));
            }
            Fixity::Xfy => {
                self.infix.insert(name.into(), (p, p - 1, p));
            }
            Fixity::Yfx => {
                self.infix.insert(name.into(), (p, p, p - 1));
            }
        }
    }

    /// Operators of program, declaration and specification files.
    pub fn program() -> OpTable {
        use Fixity::*;
        let mut t = OpTable::default();
        t.add(":-", Xfx, 1200);
        t.add(":-", Fx, 1200);
        t.add("type", Fx, 1185);
        t.add("predicate", Fx, 1180);
        t.add("--->", Xfx, 1179);
        t.add("postcondition", Xfx, 1170);
        t.add("precondition", Xfx, 1160);
        t.add("pred", Fx, 1150);
        t.add("mode", Fx, 1150);
        t.add("functors", Fx, 1150);
        t.add("also", Xfy, 1110);
        t.add("and", Xfy, 1105);
        t.add(";", Xfy, 1100);
        t.add("=>", Xfy, 1050);
        t.add(",", Xfy, 1000);
        t.add("not", Fy, 900);
        t.add("\\+", Fy, 900);
        t.add("=", Xfx, 700);
        t.add("\\=", Xfx, 700);
        t.add("/", Yfx, 400);
        t
    }

    /// Operators of interpretation files: the program table plus the truth
    /// values as rule prefixes, `default` and `when`.
    pub fn interpretation() -> OpTable {
        use Fixity::*;
        let mut t = OpTable::program();
        for v in ["u", "f", "t", "i", "default"] {
            t.add(v, Fx, 1150);
        }
        t.add("when", Xfx, 1140);
        t
    }

    fn is_infix(&self, name: &str) -> bool {
        self.infix.contains_key(name)
    }
}

/// A parsed statement together with its starting line.
#[derive(Clone, Debug)]
pub struct Statement {
    pub term: Term,
    pub line: usize,
}

pub fn parse_statements(src: &str, ops: &OpTable) -> Result<Vec<Statement>, SyntaxError> {
    let toks = tokenize(src)?;
    let mut p = Parser { toks, pos: 0, ops, anon: 0 };
    let mut out = Vec::new();
    while p.pos < p.toks.len() {
        let line = p.toks[p.pos].line;
        let (term, _) = p.parse(1200)?;
        p.expect_end()?;
        out.push(Statement { term, line });
    }
    Ok(out)
}

/// Parse a single term (no terminating dot required).
pub fn parse_term(src: &str) -> Result<Term, SyntaxError> {
    let ops = OpTable::program();
    let toks = tokenize(src)?;
    let mut p = Parser { toks, pos: 0, ops: &ops, anon: 0 };
    let (t, _) = p.parse(1200)?;
    if p.pos < p.toks.len() && p.toks[p.pos].tok == Tok::End {
        p.pos += 1;
    }
    if p.pos < p.toks.len() {
        let tk = &p.toks[p.pos];
        return Err(SyntaxError::new(tk.line, tk.col, "unexpected trailing input"));
    }
    Ok(t)
}

struct Parser<'a> {
    toks: Vec<Token>,
    pos: usize,
    ops: &'a OpTable,
    anon: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn err_here(&self, msg: &str) -> SyntaxError {
        match self.toks.get(self.pos) {
            Some(t) => SyntaxError::new(t.line, t.col, msg),
            None => {
                let (l, c) = self.toks.last().map_or((1, 1), |t| (t.line, t.col + 1));
                SyntaxError::new(l, c, format!("{} at end of input", msg))
            }
        }
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), SyntaxError> {
        if self.peek() == Some(&want) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err_here(&format!("expected {}", what)))
        }
    }

    fn expect_end(&mut self) -> Result<(), SyntaxError> {
        self.expect(Tok::End, "'.'")
    }

    fn starts_term(&self) -> bool {
        match self.peek() {
            None => false,
            Some(Tok::Close | Tok::CloseList | Tok::Bar | Tok::Comma | Tok::End) => false,
            Some(Tok::Name(n)) => !self.ops.is_infix(n) || self.ops.prefix.contains_key(n),
            Some(_) => true,
        }
    }

    fn parse(&mut self, max: u16) -> Result<(Term, u16), SyntaxError> {
        let (mut left, mut lp) = self.primary(max)?;
        loop {
            let name = match self.peek() {
                Some(Tok::Name(n)) => n.clone(),
                Some(Tok::Comma) => ",".to_string(),
                _ => break,
            };
            let Some(&(p, lmax, rmax)) = self.ops.infix.get(&name) else { break };
            if p > max || lp > lmax {
                break;
            }
            self.pos += 1;
            let (right, _) = self.parse(rmax)?;
            left = Term::App(name, vec![left, right]);
            lp = p;
        }
        Ok((left, lp))
    }

    fn args(&mut self) -> Result<Vec<Term>, SyntaxError> {
        let mut args = vec![self.parse(999)?.0];
        while self.peek() == Some(&Tok::Comma) {
            self.pos += 1;
            args.push(self.parse(999)?.0);
        }
        self.expect(Tok::Close, "')'")?;
        Ok(args)
    }

    fn primary(&mut self, max: u16) -> Result<(Term, u16), SyntaxError> {
        let Some(tok) = self.peek().cloned() else {
            return Err(self.err_here("expected a term"));
        };
        match tok {
            Tok::Int(n) => {
                self.pos += 1;
                Ok((Term::constant(n), 0))
            }
            Tok::Str(s) => {
                self.pos += 1;
                Ok((Term::constant(s), 0))
            }
            Tok::Var(v) => {
                self.pos += 1;
                if v == "_" {
                    self.anon += 1;
                    Ok((Term::Var(format!("_A{}", self.anon)), 0))
                } else {
                    Ok((Term::Var(v), 0))
                }
            }
            Tok::Open | Tok::OpenCall => {
                self.pos += 1;
                let (t, _) = self.parse(1200)?;
                self.expect(Tok::Close, "')'")?;
                Ok((t, 0))
            }
            Tok::OpenList => {
                self.pos += 1;
                let mut items = vec![self.parse(999)?.0];
                while self.peek() == Some(&Tok::Comma) {
                    self.pos += 1;
                    items.push(self.parse(999)?.0);
                }
                let tail = if self.peek() == Some(&Tok::Bar) {
                    self.pos += 1;
                    self.parse(999)?.0
                } else {
                    Term::nil()
                };
                self.expect(Tok::CloseList, "']'")?;
                Ok((Term::list(items, tail), 0))
            }
            Tok::Quoted(name) => {
                self.pos += 1;
                if self.peek() == Some(&Tok::OpenCall) {
                    self.pos += 1;
                    let args = self.args()?;
                    return Ok((Term::App(name, args), 0));
                }
                Ok((Term::constant(name), 0))
            }
            Tok::Name(name) => {
                self.pos += 1;
                if self.peek() == Some(&Tok::OpenCall) {
                    self.pos += 1;
                    let args = self.args()?;
                    return Ok((Term::App(name, args), 0));
                }
                if (name == "all" || name == "ex") && self.peek() == Some(&Tok::OpenList) {
                    let (vars, _) = self.primary(0)?;
                    let (body, _) = self.parse(999)?;
                    return Ok((Term::App(name, vec![vars, body]), 200));
                }
                if let Some(&(p, amax)) = self.ops.prefix.get(&name) {
                    if self.starts_term() && p <= max {
                        let (arg, _) = self.parse(amax)?;
                        return Ok((Term::App(name, vec![arg]), p));
                    }
                    return Ok((Term::constant(name), 0));
                }
                // `name (args)` with a space: accepted as an application, as in
                // mode declarations written `p (in, out)`.
                if self.peek() == Some(&Tok::Open) && !self.ops.is_infix(&name) {
                    self.pos += 1;
                    let args = self.args()?;
                    return Ok((Term::App(name, args), 0));
                }
                Ok((Term::constant(name), 0))
            }
            _ => Err(self.err_here("expected a term")),
        }
    }
}
