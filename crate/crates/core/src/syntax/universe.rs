//! Finite carriers of ground terms.
//!
//! A carrier holds every ground term of depth at most `d` over an alphabet.
//! When the alphabet has a function symbol of positive arity it can also hold
//! one overflow element standing for all deeper terms, which makes function
//! application total: the carrier is then the quotient of the Herbrand
//! universe that identifies every term deeper than `d`.

use std::collections::{BTreeSet, HashMap};

use super::term::{Term, DEEP};

pub type Elem = u32;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum UniverseError {
    #[error("carrier has more than {cap} elements at depth {depth}; lower the depth bound")]
    CapExceeded { cap: usize, depth: usize },
    #[error("depth bound must be at least 1")]
    ZeroDepth,
}

pub const DEFAULT_CAP: usize = 200_000;

#[derive(Debug, Clone)]
pub struct Universe {
    depth: usize,
    functors: Vec<(String, usize)>,
    fun_index: HashMap<(String, usize), u32>,
    nodes: Vec<(u32, Vec<Elem>)>,
    depths: Vec<u32>,
    index: HashMap<(u32, Vec<Elem>), Elem>,
    /// Per functor, a mixed-radix table over standard arguments when small
    /// enough; `NO_ELEM` marks a result deeper than the bound.
    dense: Vec<Option<Vec<Elem>>>,
    overflow: bool,
}

const NO_ELEM: Elem = Elem::MAX;
const DENSE_LIMIT: usize = 1 << 22;

impl Universe {
    /// Quotient carrier: the overflow element is present whenever some
    /// function symbol has positive arity.
    pub fn new(alphabet: &BTreeSet<(String, usize)>, depth: usize) -> Result<Universe, UniverseError> {
        let overflow = alphabet.iter().any(|(_, a)| *a > 0);
        Universe::build(alphabet, depth, overflow, DEFAULT_CAP)
    }

    /// Carrier without the overflow element; application may leave it.
    pub fn truncated(alphabet: &BTreeSet<(String, usize)>, depth: usize) -> Result<Universe, UniverseError> {
        Universe::build(alphabet, depth, false, DEFAULT_CAP)
    }

    pub fn build(
        alphabet: &BTreeSet<(String, usize)>,
        depth: usize,
        overflow: bool,
        cap: usize,
    ) -> Result<Universe, UniverseError> {
        if depth == 0 {
            return Err(UniverseError::ZeroDepth);
        }
        let functors: Vec<(String, usize)> = alphabet.iter().filter(|(n, _)| n != DEEP).cloned().collect();
        let fun_index = functors.iter().enumerate().map(|(i, f)| (f.clone(), i as u32)).collect();
        let mut u = Universe {
            depth,
            functors,
            fun_index,
            nodes: Vec::new(),
            depths: Vec::new(),
            index: HashMap::new(),
            dense: Vec::new(),
            overflow,
        };
        // level 1: constants
        for (fi, (_, ar)) in u.functors.clone().iter().enumerate() {
            if *ar == 0 {
                u.push(fi as u32, Vec::new(), 1, cap)?;
            }
        }
        for level in 2..=depth {
            let below: Vec<Elem> = (0..u.nodes.len() as Elem).collect();
            let prev_level = level as u32 - 1;
            for (fi, (_, ar)) in u.functors.clone().iter().enumerate() {
                if *ar == 0 || below.is_empty() {
                    continue;
                }
                // all tuples over `below` with at least one element at level-1
                let mut idx = vec![0usize; *ar];
                'tuples: loop {
                    let args: Vec<Elem> = idx.iter().map(|&i| below[i]).collect();
                    if args.iter().any(|&a| u.depths[a as usize] == prev_level) {
                        u.push(fi as u32, args, level as u32, cap)?;
                    }
                    let mut k = *ar;
                    loop {
                        if k == 0 {
                            break 'tuples;
                        }
                        k -= 1;
                        idx[k] += 1;
                        if idx[k] < below.len() {
                            break;
                        }
                        idx[k] = 0;
                    }
                }
            }
        }
        u.build_dense();
        Ok(u)
    }

    fn build_dense(&mut self) {
        let n = self.nodes.len();
        self.dense = self
            .functors
            .iter()
            .map(|(_, ar)| {
                let size = n.checked_pow(*ar as u32).filter(|&s| s <= DENSE_LIMIT)?;
                Some(vec![NO_ELEM; size])
            })
            .collect();
        for (e, (f, args)) in self.nodes.iter().enumerate() {
            if let Some(table) = &mut self.dense[*f as usize] {
                let idx = args.iter().fold(0usize, |acc, &a| acc * n + a as usize);
                table[idx] = e as Elem;
            }
        }
    }

    fn push(&mut self, f: u32, args: Vec<Elem>, depth: u32, cap: usize) -> Result<(), UniverseError> {
        if self.nodes.len() >= cap {
            return Err(UniverseError::CapExceeded { cap, depth: self.depth });
        }
        let id = self.nodes.len() as Elem;
        self.index.insert((f, args.clone()), id);
        self.nodes.push((f, args));
        self.depths.push(depth);
        Ok(())
    }

    pub fn depth_bound(&self) -> usize {
        self.depth
    }

    pub fn has_overflow(&self) -> bool {
        self.overflow
    }

    /// Number of standard (non-overflow) elements.
    pub fn standard_len(&self) -> usize {
        self.nodes.len()
    }

    /// Number of carrier elements including the overflow element.
    pub fn len(&self) -> usize {
        self.nodes.len() + usize::from(self.overflow)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn elems(&self) -> impl Iterator<Item = Elem> {
        0..self.len() as Elem
    }

    pub fn overflow_elem(&self) -> Option<Elem> {
        self.overflow.then_some(self.nodes.len() as Elem)
    }

    pub fn is_overflow(&self, e: Elem) -> bool {
        e as usize == self.nodes.len()
    }

    pub fn functors(&self) -> &[(String, usize)] {
        &self.functors
    }

    pub fn functor_id(&self, name: &str, arity: usize) -> Option<u32> {
        self.fun_index.get(&(name.to_string(), arity)).copied()
    }

    pub fn functor(&self, f: u32) -> &(String, usize) {
        &self.functors[f as usize]
    }

    pub fn elem_depth(&self, e: Elem) -> usize {
        if self.is_overflow(e) {
            self.depth + 1
        } else {
            self.depths[e as usize] as usize
        }
    }

    pub fn decompose(&self, e: Elem) -> Option<(u32, &[Elem])> {
        self.nodes.get(e as usize).map(|(f, a)| (*f, a.as_slice()))
    }

    /// Apply a function symbol. `None` only on a truncated carrier when the
    /// result would be too deep.
    pub fn app(&self, f: u32, args: &[Elem]) -> Option<Elem> {
        if args.iter().any(|&a| self.is_overflow(a)) {
            return self.overflow_elem();
        }
        let found = match &self.dense[f as usize] {
            Some(table) => {
                let n = self.nodes.len();
                let e = table[args.iter().fold(0usize, |acc, &a| acc * n + a as usize)];
                (e != NO_ELEM).then_some(e)
            }
            None => self.index.get(&(f, args.to_vec())).copied(),
        };
        found.or_else(|| self.overflow_elem())
    }

    /// The element denoted by a ground term. Unknown function symbols give
    /// `None`; terms deeper than the bound give the overflow element when
    /// present.
    pub fn elem_of(&self, t: &Term) -> Option<Elem> {
        match t {
            Term::Var(_) => None,
            Term::App(name, args) if name == DEEP && args.is_empty() => self.overflow_elem(),
            Term::App(name, args) => {
                let f = self.functor_id(name, args.len())?;
                let mut ids = Vec::with_capacity(args.len());
                for a in args {
                    ids.push(self.elem_of(a)?);
                }
                self.app(f, &ids)
            }
        }
    }

    pub fn term_of(&self, e: Elem) -> Term {
        match self.decompose(e) {
            None => Term::constant(DEEP),
            Some((f, args)) => Term::App(self.functors[f as usize].0.clone(), args.iter().map(|&a| self.term_of(a)).collect()),
        }
    }

    /// Standard terms in enumeration order.
    pub fn terms(&self) -> Vec<Term> {
        (0..self.nodes.len() as Elem).map(|e| self.term_of(e)).collect()
    }

    /// Number of ground atoms of the given arity.
    pub fn atom_count(&self, arity: usize) -> Option<usize> {
        self.len().checked_pow(arity as u32)
    }
}
