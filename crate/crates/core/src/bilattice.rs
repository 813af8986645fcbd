//! The four-element bilattice of truth values.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// A truth value: undefined, false, true or inconsistent (inadmissible).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TruthValue4 {
    #[serde(rename = "u")]
    U,
    #[serde(rename = "f")]
    F,
    #[serde(rename = "t")]
    T,
    #[serde(rename = "i")]
    I,
}

pub use TruthValue4::{F, I, T, U};

impl TruthValue4 {
    pub const ALL: [TruthValue4; 4] = [U, F, T, I];

    /// Sets-of-booleans reading: (contains false, contains true).
    pub fn to_pair(self) -> (bool, bool) {
        match self {
            U => (false, false),
            F => (true, false),
            T => (false, true),
            I => (true, true),
        }
    }

    pub fn from_pair(has_false: bool, has_true: bool) -> Self {
        match (has_false, has_true) {
            (false, false) => U,
            (true, false) => F,
            (false, true) => T,
            (true, true) => I,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            U => 'u',
            F => 'f',
            T => 't',
            I => 'i',
        }
    }

    pub fn is_classical(self) -> bool {
        matches!(self, T | F)
    }
}

impl fmt::Display for TruthValue4 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("not a truth value: {0:?}")]
pub struct ParseTruthValueError(pub String);

impl FromStr for TruthValue4 {
    type Err = ParseTruthValueError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "u" => Ok(U),
            "f" => Ok(F),
            "t" => Ok(T),
            "i" => Ok(I),
            _ => Err(ParseTruthValueError(s.to_string())),
        }
    }
}

// Both orders are computed on the pair reading. In the truth order a value
// goes up by losing "false" and gaining "true"; in the information order it
// goes up by gaining either.

pub fn and4(a: TruthValue4, b: TruthValue4) -> TruthValue4 {
    let (af, at) = a.to_pair();
    let (bf, bt) = b.to_pair();
    TruthValue4::from_pair(af || bf, at && bt)
}

pub fn or4(a: TruthValue4, b: TruthValue4) -> TruthValue4 {
    let (af, at) = a.to_pair();
    let (bf, bt) = b.to_pair();
    TruthValue4::from_pair(af && bf, at || bt)
}

pub fn neg4(a: TruthValue4) -> TruthValue4 {
    let (af, at) = a.to_pair();
    TruthValue4::from_pair(at, af)
}

/// Consensus: greatest lower bound in the information order.
pub fn meet_info(a: TruthValue4, b: TruthValue4) -> TruthValue4 {
    let (af, at) = a.to_pair();
    let (bf, bt) = b.to_pair();
    TruthValue4::from_pair(af && bf, at && bt)
}

/// Gullibility: least upper bound in the information order.
pub fn join_info(a: TruthValue4, b: TruthValue4) -> TruthValue4 {
    let (af, at) = a.to_pair();
    let (bf, bt) = b.to_pair();
    TruthValue4::from_pair(af || bf, at || bt)
}

pub fn info_leq(a: TruthValue4, b: TruthValue4) -> bool {
    a == U || a == b || b == I
}

pub fn truth_leq(a: TruthValue4, b: TruthValue4) -> bool {
    let (af, at) = a.to_pair();
    let (bf, bt) = b.to_pair();
    (bf <= af) && (at <= bt)
}

/// The four-valued "head :- body" connective, read as model / not model.
pub fn arrow4(head: TruthValue4, body: TruthValue4) -> bool {
    info_leq(body, head)
}

pub fn and_all<I: IntoIterator<Item = TruthValue4>>(it: I) -> TruthValue4 {
    it.into_iter().fold(T, and4)
}

pub fn or_all<I: IntoIterator<Item = TruthValue4>>(it: I) -> TruthValue4 {
    it.into_iter().fold(F, or4)
}

pub fn meet_all<I: IntoIterator<Item = TruthValue4>>(it: I) -> TruthValue4 {
    it.into_iter().fold(I, meet_info)
}
