use super::*;
use crate::syntax::{parse_program, parse_term};

const NEGATION: &str = "p(a). p(b) :- p(b). p(c) :- not p(c). p(d) :- not p(a).";

const BOOL: &str = "
    or(t, t, t). or(t, f, t). or(f, t, t). or(f, f, f).
    neg(t, f). neg(f, t).
    implies(X, Y) :- neg(X, U), or(U, Y, t).
";

fn atom(src: &str) -> Atom {
    Atom::from_term(&parse_term(src).unwrap()).unwrap()
}

fn query(src: &str) -> Vec<Literal> {
    vec![Literal::Pos(atom(src))]
}

#[test]
fn clark_example_outcomes() {
    let p = parse_program(NEGATION).unwrap();
    let s = Sld::new(&p);
    assert_eq!(s.decide(&query("p(a)"), 1000).unwrap(), Verdict::Succeeds);
    assert_eq!(s.decide(&query("p(d)"), 1000).unwrap(), Verdict::FinitelyFails);
    assert_eq!(s.decide(&query("p(b)"), 1000).unwrap(), Verdict::BudgetExceeded);
    assert_eq!(s.decide(&query("p(c)"), 1000).unwrap(), Verdict::BudgetExceeded);
    assert_eq!(s.decide(&query("p(e)"), 1000).unwrap(), Verdict::FinitelyFails);
}

#[test]
fn failure_tree_records_succeeding_negated_atom() {
    let p = parse_program(NEGATION).unwrap();
    let t = Sld::new(&p).build_failure_tree(&atom("p(d)"), 1000).unwrap();
    let kids = t.children();
    assert_eq!(kids.len(), 1);
    assert!(kids[0].is_negative());
    assert_eq!(kids[0].atom(), &atom("p(a)"));
    // p(a), p(b) and p(c) heads do not unify with p(d)
    assert_eq!(t.attempts.iter().filter(|a| a.head_unifies).count(), 1);
}

#[test]
fn or3_failure_has_two_failed_disjuncts() {
    let p = parse_program("or3(_, t, t). or3(B, f, B).").unwrap();
    let t = Sld::new(&p).build_failure_tree(&atom("or3(t,[],t)"), 1000).unwrap();
    assert_eq!(t.attempts.len(), 2);
    assert!(t.attempts.iter().all(|a| !a.head_unifies));
    assert!(t.children().is_empty());
}

#[test]
fn implies_proof_tree() {
    let p = parse_program(BOOL).unwrap();
    let s = Sld::new(&p);
    let t = s.build_proof_tree(&atom("implies(f,f)"), 1000).unwrap();
    assert_eq!(t.atom, atom("implies(f,f)"));
    let kids: Vec<String> = t.children.iter().map(|c| c.atom.to_string()).collect();
    assert_eq!(kids, vec!["neg(f,t)", "or(t,f,t)"]);
    assert!(t.children.iter().all(|c| c.children.is_empty()));
    assert_eq!(s.decide(&query("implies(t,f)"), 1000).unwrap(), Verdict::FinitelyFails);
}

#[test]
fn answers_and_enumeration() {
    let p = parse_program(BOOL).unwrap();
    let s = Sld::new(&p);
    let q = query("implies(X, f)");
    match s.solve(&q, 1000).unwrap() {
        SldOutcome::Succeeds { answer, .. } => assert_eq!(answer.get("X"), Some(&Term::constant("f"))),
        other => panic!("{:?}", other),
    }
    let mut b = 1000;
    let all = s.solutions(&query("or(X, Y, t)"), &mut b).unwrap();
    assert_eq!(all.len(), 3);
}

#[test]
fn occurs_check_is_on() {
    let p = parse_program("loop(X) :- X = f(X).").unwrap();
    assert_eq!(Sld::new(&p).decide(&query("loop(Y)"), 100).unwrap(), Verdict::FinitelyFails);
}

#[test]
fn nonground_negation_flounders() {
    let p = parse_program("q(a). r(X) :- not q(X).").unwrap();
    assert!(matches!(Sld::new(&p).decide(&query("r(Y)"), 100), Err(SldError::Flounder(_))));
}

#[test]
fn error_aborts() {
    let p = parse_program("h([], _) :- error(\"empty\"). h([H|_], H).").unwrap();
    let s = Sld::new(&p);
    assert_eq!(s.decide(&query("h([], X)"), 100).unwrap(), Verdict::AbortedByError);
    assert_eq!(s.decide(&query("h([1], X)"), 100).unwrap(), Verdict::Succeeds);
}

#[test]
fn proof_tree_for_subtraction() {
    let p = parse_program(
        "sub(0,0,0). sub(s(A),0,s(D)) :- sub(A,0,D). sub(s(A),s(B),D) :- sub(A,B,D).
         eq_diff(A,B,E,F) :- sub(A,B,D), sub(E,F,D).",
    )
    .unwrap();
    let t = Sld::new(&p).build_proof_tree(&atom("eq_diff(s(0),0,s(s(0)),s(0))"), 1000).unwrap();
    let kids: Vec<String> = t.children.iter().map(|c| c.atom.to_string()).collect();
    assert_eq!(kids, vec!["sub(s(0),0,s(0))", "sub(s(s(0)),s(0),s(0))"]);
    assert_eq!(t.size(), 6);
}

#[test]
fn backtracking_discards_failed_branches() {
    let p = parse_program("q(1). q(2). r(2). p(X) :- q(X), r(X).").unwrap();
    let t = Sld::new(&p).build_proof_tree(&atom("p(2)"), 100).unwrap();
    assert_eq!(t.size(), 3);
    let mut q = query("p(X)");
    q.push(Literal::Neg(atom("q(3)")));
    match Sld::new(&p).solve(&q, 100).unwrap() {
        SldOutcome::Succeeds { answer, proofs } => {
            assert_eq!(answer.get("X"), Some(&Term::constant("2")));
            assert_eq!(proofs.len(), 2);
            assert_eq!(proofs[0].size(), 3);
            assert_eq!(proofs[1].kind, NodeKind::Negative);
        }
        other => panic!("{:?}", other),
    }
}
