use std::sync::Arc;

use super::*;
use crate::bilattice::{F, I, T, U};
use crate::syntax::{parse_program, parse_term, PredKey, Term, Universe};

fn atom(src: &str) -> Atom {
    Atom::from_term(&parse_term(src).unwrap()).unwrap()
}

fn carrier(p: &crate::syntax::Program, d: usize) -> Arc<Universe> {
    Arc::new(Universe::new(&p.alphabet(), d).unwrap())
}

#[test]
fn equality_bypasses_the_interpretation() {
    let p = parse_program("p(a). q(0). q(s(0)).").unwrap();
    let i = ExtensionalInterpretation::bottom(carrier(&p, 2), &p.predicates()).unwrap();
    assert_eq!(i.value_of(&atom("a = a")).unwrap(), T);
    assert_eq!(i.value_of(&atom("0 = s(0)")).unwrap(), F);
    assert_eq!(i.value_of(&atom("p(a)")).unwrap(), U);
}

#[test]
fn glut_from_sets() {
    let p = parse_program("p(a).").unwrap();
    let c = carrier(&p, 1);
    let i = ExtensionalInterpretation::from_sets(c, &p.predicates(), &[atom("p(a)")], &[atom("p(a)")]).unwrap();
    assert_eq!(i.value_of(&atom("p(a)")).unwrap(), I);
    assert_eq!(i.true_set(), vec![atom("p(a)")]);
    assert_eq!(i.false_set(), vec![atom("p(a)")]);
}

#[test]
fn conjunction_with_false_literal_is_false() {
    let p = parse_program("r :- p, q. p :- p. q :- fail.").unwrap();
    let c = carrier(&p, 1);
    let cp = CompiledProgram::new(&p, c).unwrap();
    let preds = cp.preds().to_vec();
    let mut i = cp.bottom().unwrap();
    let q = preds.iter().position(|k| *k == PredKey::new("q", 0)).unwrap();
    i.set(q, &[], F);
    let r = preds.iter().position(|k| *k == PredKey::new("r", 0)).unwrap();
    assert_eq!(cp.head_value(&i, r, &[]), F);
}

#[test]
fn empty_body_is_true_and_empty_definition_false() {
    let p = parse_program("p(a). q(X) :- r(X).").unwrap();
    let c = carrier(&p, 1);
    let cp = CompiledProgram::new(&p, c.clone()).unwrap();
    let i = cp.bottom().unwrap();
    let a = c.elem_of(&Term::constant("a")).unwrap();
    assert_eq!(cp.head_value(&i, 0, &[a]), T);
    let r = cp.preds().iter().position(|k| k.name == "r").unwrap();
    assert_eq!(cp.head_value(&i, r, &[a]), F);
}

#[test]
fn negated_body_under_clark_example() {
    let p = parse_program("p(a). p(b) :- p(b). p(c) :- not p(c). p(d) :- not p(a).").unwrap();
    let c = carrier(&p, 1);
    let cp = CompiledProgram::new(&p, c.clone()).unwrap();
    let mut i = cp.bottom().unwrap();
    let e = |n: &str| c.elem_of(&Term::constant(n)).unwrap();
    i.set(0, &[e("a")], T);
    assert_eq!(cp.head_value(&i, 0, &[e("d")]), F);
    assert_eq!(cp.head_value(&i, 0, &[e("c")]), U);
    let def = p.definitions()[0].clone();
    let (_, body) = def.ground_at(&[Term::constant("d")]).unwrap();
    assert_eq!(eval_body(&p, &i, &body).unwrap(), F);
}

#[test]
fn existential_body() {
    let p = parse_program(
        "or(t,t,t). or(t,f,t). or(f,t,t). or(f,f,f). neg(t,f). neg(f,t).
         implies(X, Y) :- neg(X, U), or(U, Y, t).",
    )
    .unwrap();
    let c = carrier(&p, 1);
    let cp = CompiledProgram::new(&p, c.clone()).unwrap();
    // the facts as a two-valued interpretation
    let mut i = cp.bottom().unwrap();
    for pi in 0..cp.preds().len() {
        if cp.preds()[pi].name == "implies" {
            continue;
        }
        for o in 0..i.table(pi).len() {
            let args = i.args_at(cp.preds()[pi].arity, o);
            let v = cp.head_value(&cp.bottom().unwrap(), pi, &args);
            i.table_mut(pi)[o] = v;
        }
    }
    let imp = cp.preds().iter().position(|k| k.name == "implies").unwrap();
    let e = |n: &str| c.elem_of(&Term::constant(n)).unwrap();
    assert_eq!(cp.head_value(&i, imp, &[e("t"), e("f")]), F);
    assert_eq!(cp.head_value(&i, imp, &[e("f"), e("f")]), T);
    assert_eq!(cp.head_value(&i, imp, &[e("t"), e("t")]), T);
}

#[test]
fn meet_of_two_models() {
    let p = parse_program("p :- not q. q :- not p. r. s :- r.").unwrap();
    let c = carrier(&p, 1);
    let preds: Vec<PredKey> = ["p", "q", "r", "s"].iter().map(|n| PredKey::new(*n, 0)).collect();
    let mk = |vals: [TruthValue4; 4]| {
        let mut i = ExtensionalInterpretation::bottom(c.clone(), &preds).unwrap();
        for (k, v) in vals.iter().enumerate() {
            i.set(k, &[], *v);
        }
        i
    };
    let m = mk([T, F, T, T]);
    let n = mk([F, T, T, T]);
    assert_eq!(meet_interp(&m, &n).unwrap(), mk([U, U, T, T]));
    assert_eq!(meet_interp(&m, &m).unwrap(), m);
    assert!(matches!(compare(&m, &n), Comparison::Incomparable { .. }));
    assert_eq!(compare(&m, &m), Comparison::Equal);
    assert!(matches!(compare(&mk([U, U, T, T]), &m), Comparison::Below { .. }));
}

#[test]
fn dump_round_trip() {
    let p = parse_program("p(0). p(s(X)) :- p(X).").unwrap();
    let c = carrier(&p, 3);
    let preds = p.predicates();
    let i = ExtensionalInterpretation::from_sets(c.clone(), &preds, &[atom("p(s(0))"), atom("p('$deep')")], &[atom("p(0)")])
        .unwrap();
    let d = i.dump();
    assert_eq!(d, "p('$deep') t\np(0) f\np(s(0)) t\n");
    let back = ExtensionalInterpretation::parse_dump(&d, c, &preds).unwrap();
    assert_eq!(back, i);
}

const NAT_RULES: &str = "
    :- type nat ---> 0 ; s(nat).
    minus(A, 0, A).
    minus(s(A), s(B), C) :- minus(A, B, C).
    le(0, _).
    le(s(X), s(Y)) :- le(X, Y).
    t sub(A, B, C) when A : nat, B : nat, minus(A, B, C).
    f sub(A, B, _) when A : nat, B : nat, le(B, A).
    default i.
";

#[test]
fn pattern_rules_with_guards() {
    let pi = PatternInterpretation::parse(NAT_RULES).unwrap();
    assert_eq!(pi.value_of(&atom("sub(s(s(0)), s(0), s(0))")).unwrap(), T);
    assert_eq!(pi.value_of(&atom("sub(s(s(0)), s(0), 0)")).unwrap(), F);
    assert_eq!(pi.value_of(&atom("sub(0, s(0), 0)")).unwrap(), I);
    assert_eq!(pi.value_of(&atom("sub([], 0, [])")).unwrap(), I);
    assert_eq!(pi.value_of(&atom("0 = 0")).unwrap(), T);
}

#[test]
fn pattern_and_materialized_agree() {
    let pi = PatternInterpretation::parse(NAT_RULES).unwrap();
    let mut alpha = pi.alphabet();
    alpha.insert(("[]".into(), 0));
    let c = Arc::new(Universe::new(&alpha, 3).unwrap());
    let preds = vec![PredKey::new("sub", 3)];
    let m = pi.materialize(c, &preds).unwrap();
    for (a, v) in m.entries() {
        assert_eq!(pi.value_of(&a).unwrap(), v, "{}", a);
        assert_eq!(m.value_of(&a).unwrap(), v);
    }
    // the overflow element matches only variables, so it is never a nat
    assert_eq!(m.value_of(&atom("sub('$deep', 0, '$deep')")).unwrap(), I);
}

#[test]
fn pattern_file_errors() {
    assert!(PatternInterpretation::parse("t p(X).").is_err());
    assert!(PatternInterpretation::parse("t p(X) when X : color. default f.").is_err());
    assert!(PatternInterpretation::parse("default f. default t.").is_err());
}
