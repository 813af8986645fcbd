//! Model checking: each head grounding must relate its head value to its
//! body value, for one of five relations.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::bilattice::{info_leq, TruthValue4, F, I, T, U};
use crate::engine::phi;
use crate::interp::{CompiledProgram, ExtensionalInterpretation, InterpError, InterpretationView};
use crate::sld::{Sld, Verdict};
use crate::syntax::{Literal, Program};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Relation {
    #[serde(rename = "eq2")]
    Eq2,
    #[serde(rename = "eq3")]
    Eq3,
    #[serde(rename = "eq4")]
    Eq4,
    #[serde(rename = "info_geq3")]
    InfoGeq3,
    #[serde(rename = "info_geq4")]
    InfoGeq4,
}

impl Relation {
    pub const ALL: [Relation; 5] = [Relation::Eq2, Relation::Eq3, Relation::Eq4, Relation::InfoGeq3, Relation::InfoGeq4];

    /// Values an interpretation may use under this relation.
    pub fn domain(self) -> &'static [TruthValue4] {
        match self {
            Relation::Eq2 => &[F, T],
            Relation::Eq3 => &[U, F, T],
            Relation::InfoGeq3 => &[F, T, I],
            Relation::Eq4 | Relation::InfoGeq4 => &[U, F, T, I],
        }
    }

    pub fn holds(self, head: TruthValue4, body: TruthValue4) -> bool {
        match self {
            Relation::Eq2 | Relation::Eq3 | Relation::Eq4 => head == body,
            Relation::InfoGeq3 | Relation::InfoGeq4 => info_leq(body, head),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Relation::Eq2 => "eq2",
            Relation::Eq3 => "eq3",
            Relation::Eq4 => "eq4",
            Relation::InfoGeq3 => "info_geq3",
            Relation::InfoGeq4 => "info_geq4",
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Relation {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Relation::ALL.into_iter().find(|r| r.name() == s).ok_or_else(|| format!("unknown relation {}", s))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error(transparent)]
    Interp(#[from] InterpError),
    #[error("{atom} is {value}, which {relation} does not allow")]
    OutsideDomain { relation: Relation, atom: String, value: TruthValue4 },
    #[error("not a ⊒4-model: {0}")]
    NotAModel(String),
}

/// A head grounding with its head and body values.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub atom: String,
    pub head: TruthValue4,
    pub body: TruthValue4,
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: head {} body {}", self.atom, self.head, self.body)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ModelVerdict {
    pub relation: Relation,
    pub holds: bool,
    /// The first violating head grounding in carrier order.
    pub witness: Option<Witness>,
}

impl fmt::Display for ModelVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.witness {
            None => write!(f, "{}: model", self.relation),
            Some(w) => write!(f, "{}: not a model ({})", self.relation, w),
        }
    }
}

/// The program's predicates, with `i` aligned to them and compiled against
/// its carrier.
fn prepare(p: &Program, i: &ExtensionalInterpretation) -> Result<(CompiledProgram, ExtensionalInterpretation), InterpError> {
    let preds = p.predicates();
    let cp = CompiledProgram::with_preds(p, i.carrier().clone(), &preds)?;
    Ok((cp, i.aligned(&preds)?))
}

/// Check `i` against every head grounding of `p` over the carrier of `i`.
/// Predicates of `i` the program does not mention are ignored.
pub fn check_model(p: &Program, i: &ExtensionalInterpretation, relation: Relation) -> Result<ModelVerdict, ModelError> {
    let (cp, i) = prepare(p, i)?;
    let dom = relation.domain();
    if let Some((atom, value)) = i.entries().find(|(_, v)| !dom.contains(v)) {
        return Err(ModelError::OutsideDomain { relation, atom: atom.to_string(), value });
    }
    for (pi, key) in cp.preds().iter().enumerate() {
        for o in 0..i.table(pi).len() {
            let args = i.args_at(key.arity, o);
            let head = i.table(pi)[o];
            let body = cp.head_value(&i, pi, &args);
            if !relation.holds(head, body) {
                let atom = i.atom_at(pi, o).to_string();
                return Ok(ModelVerdict { relation, holds: false, witness: Some(Witness { atom, head, body }) });
            }
        }
    }
    Ok(ModelVerdict { relation, holds: true, witness: None })
}

/// ⊒4-model check by comparing Φ_P(I) with I.
pub fn check_geq4_via_phi(p: &Program, i: &ExtensionalInterpretation) -> Result<bool, ModelError> {
    let (cp, i) = prepare(p, i)?;
    Ok(phi(&cp, &i).leq(&i))
}

/// Observed operational behaviour of a ground atom.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Behaviour {
    Succeeds,
    FinitelyFails,
    /// Budget exhausted, floundered or aborted by error/1.
    Unresolved,
}

/// Rows of the table relating operational behaviour to truth values.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SummaryRow {
    LeastModel,
    AnyEq4Model,
    AnyGeq4Model,
}

impl SummaryRow {
    /// Does the row allow value `v` for behaviour `b`? Unresolved atoms are
    /// read as looping.
    pub fn allows(self, b: Behaviour, v: TruthValue4) -> bool {
        match (self, b) {
            (_, Behaviour::Unresolved) => self != SummaryRow::LeastModel || v == U,
            (SummaryRow::AnyGeq4Model, Behaviour::Succeeds) => v == T || v == I,
            (SummaryRow::AnyGeq4Model, Behaviour::FinitelyFails) => v == F || v == I,
            (_, Behaviour::Succeeds) => v == T,
            (_, Behaviour::FinitelyFails) => v == F,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AtomBehaviour {
    pub atom: String,
    pub value: TruthValue4,
    pub behaviour: Behaviour,
    /// The most specific row consistent with this atom, if any.
    pub row: Option<SummaryRow>,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct SoundnessReport {
    pub atoms: Vec<AtomBehaviour>,
    pub violations: Vec<AtomBehaviour>,
    pub unresolved: usize,
}

fn strongest_row(b: Behaviour, v: TruthValue4) -> Option<SummaryRow> {
    [SummaryRow::LeastModel, SummaryRow::AnyEq4Model, SummaryRow::AnyGeq4Model].into_iter().find(|r| r.allows(b, v))
}

/// Run every carrier atom of the program's predicates through resolution
/// and check the outcome against the values of a ⊒4-model. Atoms with an
/// overflow argument have no single ground reading and are skipped.
pub fn soundness_table_check(p: &Program, i: &ExtensionalInterpretation, budget: usize) -> Result<SoundnessReport, ModelError> {
    let v = check_model(p, i, Relation::InfoGeq4)?;
    if let Some(w) = v.witness {
        return Err(ModelError::NotAModel(w.to_string()));
    }
    let sld = Sld::new(p);
    let (_, i) = prepare(p, i)?;
    let u = i.carrier().clone();
    let mut report = SoundnessReport::default();
    for pi in 0..i.preds().len() {
        for o in 0..i.table(pi).len() {
            let atom = i.atom_at(pi, o);
            if i.args_at(atom.args.len(), o).iter().any(|&e| u.is_overflow(e)) {
                continue;
            }
            let value = i.value_of(&atom)?;
            let behaviour = match sld.decide(&[Literal::Pos(atom.clone())], budget) {
                Ok(Verdict::Succeeds) => Behaviour::Succeeds,
                Ok(Verdict::FinitelyFails) => Behaviour::FinitelyFails,
                _ => Behaviour::Unresolved,
            };
            let ab = AtomBehaviour { atom: atom.to_string(), value, behaviour, row: strongest_row(behaviour, value) };
            if behaviour == Behaviour::Unresolved {
                report.unresolved += 1;
            } else if !SummaryRow::AnyGeq4Model.allows(behaviour, value) {
                report.violations.push(ab.clone());
            }
            report.atoms.push(ab);
        }
    }
    Ok(report)
}
