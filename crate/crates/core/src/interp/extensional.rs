//! Interpretations as dense truth tables over a finite carrier.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::Arc;

use crate::bilattice::{info_leq, meet_info, TruthValue4};
use crate::syntax::{Atom, Elem, PredKey, Universe};

use super::{InterpError, InterpretationView, MAX_TABLE};

#[derive(Clone, Debug)]
pub struct ExtensionalInterpretation {
    carrier: Arc<Universe>,
    preds: Vec<PredKey>,
    index: HashMap<PredKey, usize>,
    tables: Vec<Vec<TruthValue4>>,
}

impl PartialEq for ExtensionalInterpretation {
    fn eq(&self, other: &Self) -> bool {
        compare(self, other) == Comparison::Equal
    }
}

impl ExtensionalInterpretation {
    pub fn filled(carrier: Arc<Universe>, preds: &[PredKey], v: TruthValue4) -> Result<Self, InterpError> {
        let mut tables = Vec::with_capacity(preds.len());
        for p in preds {
            let size = carrier
                .atom_count(p.arity)
                .filter(|&n| n <= MAX_TABLE)
                .ok_or_else(|| InterpError::TooLarge { pred: p.to_string(), limit: MAX_TABLE })?;
            tables.push(vec![v; size]);
        }
        let index = preds.iter().enumerate().map(|(i, p)| (p.clone(), i)).collect();
        Ok(ExtensionalInterpretation { carrier, preds: preds.to_vec(), index, tables })
    }

    /// The ⊑-least interpretation, everything u.
    pub fn bottom(carrier: Arc<Universe>, preds: &[PredKey]) -> Result<Self, InterpError> {
        Self::filled(carrier, preds, TruthValue4::U)
    }

    /// Build from the atom-set pair (T, F).
    pub fn from_sets(
        carrier: Arc<Universe>,
        preds: &[PredKey],
        true_atoms: &[Atom],
        false_atoms: &[Atom],
    ) -> Result<Self, InterpError> {
        let mut i = Self::bottom(carrier, preds)?;
        for (atoms, comp) in [(true_atoms, (false, true)), (false_atoms, (true, false))] {
            for a in atoms {
                let (p, args) = i.locate(a)?;
                let (f, t) = i.get(p, &args).to_pair();
                i.set(p, &args, TruthValue4::from_pair(f || comp.0, t || comp.1));
            }
        }
        Ok(i)
    }

    pub fn carrier(&self) -> &Arc<Universe> {
        &self.carrier
    }

    pub fn preds(&self) -> &[PredKey] {
        &self.preds
    }

    pub fn pred_index(&self, key: &PredKey) -> Option<usize> {
        self.index.get(key).copied()
    }

    pub fn table(&self, p: usize) -> &[TruthValue4] {
        &self.tables[p]
    }

    pub fn table_mut(&mut self, p: usize) -> &mut [TruthValue4] {
        &mut self.tables[p]
    }

    pub fn offset(&self, args: &[Elem]) -> usize {
        let n = self.carrier.len();
        args.iter().fold(0usize, |acc, &a| acc * n + a as usize)
    }

    pub fn args_at(&self, arity: usize, mut offset: usize) -> Vec<Elem> {
        let n = self.carrier.len();
        let mut out = vec![0; arity];
        for slot in out.iter_mut().rev() {
            *slot = (offset % n) as Elem;
            offset /= n;
        }
        out
    }

    pub fn get(&self, p: usize, args: &[Elem]) -> TruthValue4 {
        self.tables[p][self.offset(args)]
    }

    pub fn set(&mut self, p: usize, args: &[Elem], v: TruthValue4) {
        let o = self.offset(args);
        self.tables[p][o] = v;
    }

    /// Predicate index and carrier arguments of a ground atom.
    pub fn locate(&self, a: &Atom) -> Result<(usize, Vec<Elem>), InterpError> {
        let p = self.pred_index(&a.key()).ok_or_else(|| InterpError::UnknownPredicate(a.key().to_string()))?;
        let args = self.carrier_args(a)?;
        Ok((p, args))
    }

    pub fn carrier_args(&self, a: &Atom) -> Result<Vec<Elem>, InterpError> {
        if !a.is_ground() {
            return Err(InterpError::NotGround(a.to_string()));
        }
        a.args
            .iter()
            .map(|t| self.carrier.elem_of(t).ok_or_else(|| InterpError::OutsideCarrier(a.to_string())))
            .collect()
    }

    pub fn atom_at(&self, p: usize, offset: usize) -> Atom {
        let key = &self.preds[p];
        let args = self.args_at(key.arity, offset);
        Atom::new(key.name.clone(), args.iter().map(|&e| self.carrier.term_of(e)).collect())
    }

    /// Every atom with its value, predicate by predicate.
    pub fn entries(&self) -> impl Iterator<Item = (Atom, TruthValue4)> + '_ {
        (0..self.preds.len()).flat_map(move |p| (0..self.tables[p].len()).map(move |o| (self.atom_at(p, o), self.tables[p][o])))
    }

    pub fn true_set(&self) -> Vec<Atom> {
        self.entries().filter(|(_, v)| v.to_pair().1).map(|(a, _)| a).collect()
    }

    pub fn false_set(&self) -> Vec<Atom> {
        self.entries().filter(|(_, v)| v.to_pair().0).map(|(a, _)| a).collect()
    }

    pub fn count(&self, v: TruthValue4) -> usize {
        self.tables.iter().map(|t| t.iter().filter(|&&x| x == v).count()).sum()
    }

    /// Same carrier (by identity or by shape) and same predicates, in any order.
    pub fn same_space(&self, other: &Self) -> bool {
        same_carrier(&self.carrier, &other.carrier)
    }

    /// Copy over another predicate list; missing predicates are u.
    pub fn aligned(&self, preds: &[PredKey]) -> Result<Self, InterpError> {
        let mut out = Self::bottom(self.carrier.clone(), preds)?;
        for (i, p) in preds.iter().enumerate() {
            if let Some(j) = self.pred_index(p) {
                out.tables[i].copy_from_slice(&self.tables[j]);
            }
        }
        Ok(out)
    }

    /// Sorted `atom value` lines for the atoms that are not u.
    pub fn dump(&self) -> String {
        let mut lines: Vec<String> =
            self.entries().filter(|(_, v)| *v != TruthValue4::U).map(|(a, v)| format!("{} {}", a, v)).collect();
        lines.sort();
        let mut s = String::new();
        for l in lines {
            let _ = writeln!(s, "{}", l);
        }
        s
    }

    /// Read a dump back. Atoms not listed are u.
    pub fn parse_dump(src: &str, carrier: Arc<Universe>, preds: &[PredKey]) -> Result<Self, InterpError> {
        let mut i = Self::bottom(carrier, preds)?;
        for (n, line) in src.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('%') {
                continue;
            }
            let (atom_src, v) = line
                .rsplit_once(char::is_whitespace)
                .ok_or_else(|| InterpError::Format { line: n + 1, msg: "expected `atom value`".into() })?;
            let v: TruthValue4 =
                v.parse().map_err(|_| InterpError::Format { line: n + 1, msg: format!("bad truth value {}", v) })?;
            let t = crate::syntax::parse_term(atom_src)
                .map_err(|e| InterpError::Format { line: n + 1, msg: e.msg })?;
            let a = Atom::from_term(&t).ok_or_else(|| InterpError::Format { line: n + 1, msg: "expected an atom".into() })?;
            let (p, args) = i.locate(&a)?;
            i.set(p, &args, v);
        }
        Ok(i)
    }

    pub fn leq(&self, other: &Self) -> bool {
        matches!(compare(self, other), Comparison::Equal | Comparison::Below { .. })
    }
}

pub(crate) fn same_carrier(a: &Arc<Universe>, b: &Arc<Universe>) -> bool {
    Arc::ptr_eq(a, b)
        || (a.len() == b.len() && a.depth_bound() == b.depth_bound() && a.functors() == b.functors() && a.has_overflow() == b.has_overflow())
}

impl InterpretationView for ExtensionalInterpretation {
    fn lookup(&self, a: &Atom) -> Result<TruthValue4, InterpError> {
        let args = self.carrier_args(a)?;
        Ok(match self.pred_index(&a.key()) {
            Some(p) => self.get(p, &args),
            None => TruthValue4::U,
        })
    }
}

/// Result of comparing two interpretations in the information order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Comparison {
    Equal,
    /// The first is strictly below the second; the witness differs.
    Below { witness: Atom },
    Above { witness: Atom },
    Incomparable { below: Atom, above: Atom },
}

fn union_preds(a: &ExtensionalInterpretation, b: &ExtensionalInterpretation) -> Vec<PredKey> {
    let mut preds = a.preds.clone();
    for p in &b.preds {
        if !preds.contains(p) {
            preds.push(p.clone());
        }
    }
    preds
}

fn value_or_u(i: &ExtensionalInterpretation, p: &PredKey, o: usize) -> TruthValue4 {
    i.pred_index(p).map_or(TruthValue4::U, |j| i.tables[j][o])
}

/// Pointwise ⊑ comparison over a shared carrier, with witnesses.
pub fn compare(a: &ExtensionalInterpretation, b: &ExtensionalInterpretation) -> Comparison {
    assert!(a.same_space(b), "interpretations over different carriers");
    let mut below: Option<Atom> = None;
    let mut above: Option<Atom> = None;
    for p in union_preds(a, b) {
        let size = a.carrier.atom_count(p.arity).unwrap_or(0);
        for o in 0..size {
            let (x, y) = (value_or_u(a, &p, o), value_or_u(b, &p, o));
            if x == y {
                continue;
            }
            let atom = || {
                let args = a.args_at(p.arity, o);
                Atom::new(p.name.clone(), args.iter().map(|&e| a.carrier.term_of(e)).collect())
            };
            if info_leq(x, y) {
                below.get_or_insert_with(atom);
            } else if info_leq(y, x) {
                above.get_or_insert_with(atom);
            } else {
                let w = atom();
                below.get_or_insert_with(|| w.clone());
                above.get_or_insert(w);
            }
            if below.is_some() && above.is_some() {
                break;
            }
        }
    }
    match (below, above) {
        (None, None) => Comparison::Equal,
        (Some(w), None) => Comparison::Below { witness: w },
        (None, Some(w)) => Comparison::Above { witness: w },
        (Some(b), Some(a)) => Comparison::Incomparable { below: b, above: a },
    }
}

/// Pointwise consensus (T1 ∩ T2, F1 ∩ F2).
pub fn meet_interp(
    a: &ExtensionalInterpretation,
    b: &ExtensionalInterpretation,
) -> Result<ExtensionalInterpretation, InterpError> {
    if !a.same_space(b) {
        return Err(InterpError::CarrierMismatch);
    }
    let preds = union_preds(a, b);
    let mut out = ExtensionalInterpretation::bottom(a.carrier.clone(), &preds)?;
    for (i, p) in preds.iter().enumerate() {
        for o in 0..out.tables[i].len() {
            out.tables[i][o] = meet_info(value_or_u(a, p, o), value_or_u(b, p, o));
        }
    }
    Ok(out)
}

