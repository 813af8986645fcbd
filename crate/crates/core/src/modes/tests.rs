use std::sync::Arc;

use super::*;
use crate::interp::PatternInterpretation;
use crate::syntax::{parse_program, parse_term, ModeArg};

const APPEND: &str = include_str!("../../../../fixtures/append_modes.pl");

fn with_append(src: &str) -> Program {
    parse_program(&format!("{}\n{}", src, APPEND)).unwrap()
}

fn atom(src: &str) -> Atom {
    Atom::from_term(&parse_term(src).unwrap()).unwrap()
}

fn mode(s: &str) -> Mode {
    Mode(s.chars().map(|c| if c == 'i' { ModeArg::In } else { ModeArg::Out }).collect())
}

#[test]
fn typedness_of_ground_atoms() {
    let p = parse_program(":- type nat ---> 0 ; s(nat). :- pred sub(nat, nat, nat). :- pred rev(list(T), list(T)).").unwrap();
    assert_eq!(well_typed(&atom("rev([], [])"), &p.decls).unwrap(), vec![true, true]);
    assert_eq!(well_typed(&atom("sub(s(0), [], 0)"), &p.decls).unwrap(), vec![true, false, true]);
    assert!(matches!(well_typed(&atom("q(0)"), &p.decls), Err(ModeError::NoPredDecl(_))));
}

#[test]
fn mode_interpretation_bullets() {
    let p = parse_program(":- pred head(list(int), int). :- type int ---> 1 ; 2.").unwrap();
    let key = PredKey::new("head", 2);
    let mi = mode_interpretation(&key, &mode("io"), &p.decls);
    assert_eq!(mi.value_of(&atom("head([1], [1])")).unwrap(), F);
    assert_eq!(mi.value_of(&atom("head([1], 1)")).unwrap(), T);
    assert_eq!(mi.value_of(&atom("head(1, 1)")).unwrap(), I);
    assert_eq!(mi.value_of(&atom("error(oops)")).unwrap(), U);

    let p = parse_program(":- pred rev(list(T), list(T)).").unwrap();
    let key = PredKey::new("rev", 2);
    let g = group_interpretation(&key, &[mode("io"), mode("oi")], &p.decls);
    assert_eq!(g.value_of(&atom("rev(42, [])")).unwrap(), F);
    assert_eq!(g.value_of(&atom("rev(42, 43)")).unwrap(), I);
    // (in, in) is implied by either mode.
    let g2 = group_interpretation(&key, &[mode("io"), mode("oi"), mode("ii")], &p.decls);
    for a in ["rev(42, [])", "rev(42, 43)", "rev([], 43)", "rev([], [])"] {
        assert_eq!(g.value_of(&atom(a)).unwrap(), g2.value_of(&atom(a)).unwrap());
    }
}

#[test]
fn naive_reverse_is_well_moded() {
    let p = with_append(include_str!("../../../../fixtures/rev.pl"));
    let r = check_well_moded(&p).unwrap();
    assert!(r.well_moded, "{:?}", r.assignments);
}

#[test]
fn swapped_reverse_needs_both_modes() {
    let p = with_append(include_str!("../../../../fixtures/rev_swapped.pl"));
    let r = check_well_moded(&p).unwrap();
    assert!(!r.well_moded);
    let passing: Vec<_> = r.passing().map(|a| a.choices.clone()).collect();
    assert_eq!(passing.len(), 1);
    assert!(passing[0].contains(&("rev/2".to_string(), Choice::Meet)));
}

#[test]
fn mutual_reverse_has_three_models() {
    let p = with_append(include_str!("../../../../fixtures/rev_mutual.pl"));
    let r = check_well_moded(&p).unwrap();
    let mut passing: Vec<(Choice, Choice)> = r
        .passing()
        .map(|a| {
            let get = |n: &str| a.choices.iter().find(|(k, _)| k == n).unwrap().1;
            (get("rev_ra/2"), get("rev_rb/2"))
        })
        .collect();
    passing.sort();
    assert_eq!(
        passing,
        vec![(Choice::Group(0), Choice::Group(1)), (Choice::Group(1), Choice::Group(0)), (Choice::Meet, Choice::Meet)]
    );
    assert!(r.well_moded);
}

#[test]
fn and_versus_also() {
    let p = parse_program(include_str!("../../../../fixtures/and3.pl")).unwrap();
    let r = check_well_moded(&p).unwrap();
    assert!(r.well_moded, "{:?}", r.coverage);

    let mut modes = BTreeMap::new();
    modes.insert(PredKey::new("and3", 3), vec![mode("iio")]);
    modes.insert(PredKey::new("fold_and3", 2), vec![mode("ii")]);
    modes.insert(PredKey::new("fold_and3a", 2), vec![mode("ii")]);
    let v = check_assignment(&p, &modes).unwrap();
    assert!(v.iter().any(|v| v.pred == "fold_and3/2" && v.head == T && v.body == I), "{:?}", v);
    assert!(v.iter().all(|v| v.pred != "fold_and3a/2"));
}

#[test]
fn error_clause_makes_the_head_safe() {
    let p = parse_program(include_str!("../../../../fixtures/heads.pl")).unwrap();
    let r = check_well_moded(&p).unwrap();
    assert!(r.well_moded);
    let u = Arc::new(Universe::new(&p.alphabet(), 2).unwrap());
    for (name, src, flagged) in [
        ("nonempty_head", include_str!("../../../../fixtures/nonempty_head.interp"), true),
        ("checked_head", include_str!("../../../../fixtures/checked_head.interp"), false),
    ] {
        let key = PredKey::new(name, 2);
        let mi = group_interpretation(&key, &[mode("io")], &p.decls);
        let intended = PatternInterpretation::parse(src).unwrap();
        let bad = check_intended_against_modes(&mi, &intended, &u, &[key]).unwrap();
        assert_eq!(!bad.is_empty(), flagged, "{}: {:?}", name, bad);
        assert!(bad.iter().all(|a| a.args[0] == Term::nil()));
    }
}

fn union(a: &BTreeMap<PredKey, Vec<Mode>>, b: &BTreeMap<PredKey, Vec<Mode>>) -> BTreeMap<PredKey, Vec<Mode>> {
    let mut out = a.clone();
    for (k, ms) in b {
        let e = out.entry(k.clone()).or_default();
        for m in ms {
            if !e.contains(m) {
                e.push(m.clone());
            }
        }
    }
    out
}

#[test]
fn meets_of_passing_assignments_pass() {
    for src in [include_str!("../../../../fixtures/rev.pl"), include_str!("../../../../fixtures/rev_mutual.pl")] {
        let p = with_append(src);
        let r = check_well_moded(&p).unwrap();
        let maps: Vec<BTreeMap<PredKey, Vec<Mode>>> = r
            .passing()
            .map(|a| {
                a.choices
                    .iter()
                    .map(|(name, c)| {
                        let key = p.predicates().into_iter().find(|k| &k.to_string() == name).unwrap();
                        let ms = modes_of(&p, &key, *c);
                        (key, ms)
                    })
                    .collect()
            })
            .collect();
        assert!(!maps.is_empty());
        for a in &maps {
            for b in &maps {
                let v = check_assignment(&p, &union(a, b)).unwrap();
                assert!(v.is_empty(), "{:?}", v);
            }
        }
    }
}

fn list(xs: &[&str]) -> String {
    format!("[{}]", xs.join(", "))
}

// Every proof of a well-typed atom uses well-typed atoms only.
fn check_proofs_well_typed(p: &Program, pred: &str) {
    let sld = crate::sld::Sld::new(p);
    let elems = ["a", "b"];
    let mut lists = vec![vec![]];
    for n in 1..=3 {
        let mut next = Vec::new();
        for l in lists.iter().filter(|l: &&Vec<&str>| l.len() == n - 1) {
            for e in elems {
                let mut l2 = l.clone();
                l2.push(e);
                next.push(l2);
            }
        }
        lists.extend(next);
    }
    let mut proved = 0;
    for x in &lists {
        let q = atom(&format!("{}({}, Y)", pred, list(x)));
        let crate::sld::SldOutcome::Succeeds { answer, .. } = sld.solve(&[crate::syntax::Literal::Pos(q.clone())], 100_000).unwrap() else {
            panic!("{} has no answer", q);
        };
        let ground = q.apply(&answer);
        assert!(well_typed(&ground, &p.decls).unwrap().iter().all(|&w| w));
        let tree = sld.build_proof_tree(&ground, 100_000).unwrap();
        for a in tree.positive_atoms() {
            assert!(well_typed(a, &p.decls).unwrap().iter().all(|&w| w), "{} in proof of {}", a, ground);
        }
        proved += 1;
    }
    assert_eq!(proved, lists.len());
}

#[test]
fn successful_well_typed_atoms_have_well_typed_proofs() {
    check_proofs_well_typed(&with_append(include_str!("../../../../fixtures/rev.pl")), "rev");
    let p = with_append(include_str!("../../../../fixtures/rev_mutual.pl"));
    check_proofs_well_typed(&p, "rev_ra");
    check_proofs_well_typed(&p, "rev_rb");
}

mod implied {
    use proptest::prelude::*;

    use super::super::mode_value;
    use crate::bilattice::meet_all;
    use crate::syntax::{Mode, ModeArg};

    fn arb_mode(n: usize) -> impl Strategy<Value = Mode> {
        proptest::collection::vec(any::<bool>(), n).prop_map(|v| Mode(v.into_iter().map(|b| if b { ModeArg::In } else { ModeArg::Out }).collect()))
    }

    fn arb_case() -> impl Strategy<Value = (Vec<Mode>, usize, Vec<bool>)> {
        (1usize..=4).prop_flat_map(|n| {
            (proptest::collection::vec(arb_mode(n), 1..4), any::<usize>(), proptest::collection::vec(any::<bool>(), n))
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(2000))]
        #[test]
        fn adding_an_implied_mode_changes_nothing((group, pick, flips) in arb_case()) {
            let base = &group[pick % group.len()];
            let implied = Mode(base.0.iter().zip(&flips).map(|(a, f)| if *f { ModeArg::In } else { *a }).collect());
            let mut bigger = group.clone();
            bigger.push(implied);
            let n = base.0.len();
            for bits in 0..(1usize << n) {
                let well: Vec<bool> = (0..n).map(|j| bits >> j & 1 == 1).collect();
                let a = meet_all(group.iter().map(|m| mode_value(&well, m)));
                let b = meet_all(bigger.iter().map(|m| mode_value(&well, m)));
                prop_assert_eq!(a, b);
            }
        }
    }
}
