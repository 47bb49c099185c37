use std::collections::BTreeSet;

use absdist::lattice::{check_metric_axioms, CheckConfig};
use absdist::parser::parse_term;
use absdist::regtypes::{
    dprime, finite_language, grammar_of_terms, parse_grammars, regtuple_distance, RegTypeError, TypeGrammar,
};
use absdist::term::Term;
use absdist::term_metric::{d_term, hausdorff_terms, TermMetricParams};
use proptest::prelude::*;

const TOL: f64 = 1e-12;

fn terms(xs: &[&str]) -> BTreeSet<Term> {
    xs.iter().map(|s| parse_term(s).unwrap()).collect()
}

fn grammar(xs: &[&str]) -> TypeGrammar {
    grammar_of_terms(&terms(xs)).unwrap()
}

fn hausdorff_of(a: &[&str], b: &[&str]) -> f64 {
    let (a, b): (Vec<Term>, Vec<Term>) = (terms(a).into_iter().collect(), terms(b).into_iter().collect());
    hausdorff_terms(&a, &b, TermMetricParams::default()).unwrap()
}

#[test]
fn lists_of_a_and_lists_of_b_are_a_third_apart() {
    let file = parse_grammars("La ::= [] | '.'(A, La)\nLb ::= [] | '.'(B, Lb)\nA ::= a\nB ::= b\n").unwrap();
    let d = dprime(&file.grammar("La").unwrap(), &file.grammar("Lb").unwrap(), 0.5, TOL).unwrap();
    // independent oracle: iterate x = p * (1 + x) / 2 from 0
    let mut x = 0.0f64;
    for _ in 0..200 {
        x = 0.5 * (1.0 + x) / 2.0;
    }
    assert!((x - 1.0 / 3.0).abs() < 1e-12);
    assert!((d - x).abs() < 1e-6, "{d}");
}

#[test]
fn singleton_example() {
    let d = dprime(&grammar(&["f(a,b)"]), &grammar(&["f(a,c)"]), 0.5, TOL).unwrap();
    assert!((d - 0.25).abs() < 1e-12);
}

#[test]
fn identical_grammars_are_at_zero() {
    let file = parse_grammars("L ::= nil | cons(A, L)\nA ::= a | b\n").unwrap();
    let g = file.grammar("L").unwrap();
    assert_eq!(dprime(&g, &g, 0.5, TOL).unwrap(), 0.0);
}

#[test]
fn different_root_functors_are_at_one() {
    assert_eq!(dprime(&grammar(&["a"]), &grammar(&["f(a)"]), 0.5, TOL).unwrap(), 1.0);
    assert_eq!(dprime(&grammar(&["a", "b"]), &grammar(&["a"]), 0.5, TOL).unwrap(), 1.0);
    assert!(dprime(&grammar(&["f(a)"]), &grammar(&["f(b)"]), 0.5, TOL).unwrap() < 1.0);
}

#[test]
fn bad_factor_is_rejected() {
    assert_eq!(dprime(&grammar(&["a"]), &grammar(&["a"]), 1.0, TOL), Err(RegTypeError::BadFactor(1.0)));
}

/// Finite languages where each root functor occurs once per side.
const SUITE: [(&[&str], &[&str]); 8] = [
    (&["a"], &["b"]),
    (&["f(a,b)"], &["f(a,c)"]),
    (&["f(a)", "g(b)"], &["f(b)", "g(b)"]),
    (&["[]", "[a]"], &["[]", "[b]"]),
    (&["a", "f(a)"], &["a", "f(f(a))"]),
    (&["f(a,b)"], &["f(a,b)", "g(a)"]),
    (&["f(a,c)", "f(b,c)"], &["f(a,c)"]),
    (&["h(a,f(b),c)"], &["h(b,f(c),c)"]),
];

#[test]
fn matches_hausdorff_on_finite_languages() {
    for (a, b) in SUITE {
        let (ga, gb) = (grammar(a), grammar(b));
        let (la, done_a) = finite_language(&ga, 3);
        let (lb, done_b) = finite_language(&gb, 3);
        assert!(done_a && done_b && la == terms(a) && lb == terms(b));
        assert!(la.len() <= 20 && lb.len() <= 20);
        let d = dprime(&ga, &gb, 0.5, TOL).unwrap();
        let h = hausdorff_of(a, b);
        assert!((d - h).abs() <= 1e-6, "{a:?} vs {b:?}: dprime {d}, hausdorff {h}");
    }
}

#[test]
fn product_shaped_languages_are_reported() {
    // one functor carrying several terms; reported, not asserted
    let cases: [(&[&str], &[&str]); 3] = [
        (&["f(a,a)", "f(a,b)", "f(b,a)", "f(b,b)"], &["f(a,a)"]),
        (&["f(a,c)", "f(b,c)", "f(a,d)", "f(b,d)"], &["f(a,c)", "f(a,d)"]),
        (&["g(a)", "g(f(a))"], &["g(b)"]),
    ];
    for (a, b) in cases {
        let d = dprime(&grammar(a), &grammar(b), 0.5, TOL).unwrap();
        let h = hausdorff_of(a, b);
        println!("{a:?} vs {b:?}: dprime {d:.6}, hausdorff {h:.6}");
        assert!((0.0..=1.0).contains(&d));
    }
}

#[test]
fn tuple_distances() {
    let file = parse_grammars(
        "A ::= a\nB ::= b\nC ::= c\nF1 ::= f(A, B)\nF2 ::= f(A, C)\n\
         tuple X:A, Y:A\ntuple X:B, Y:A\ntuple X:F1, Y:F1\ntuple X:F2, Y:F2\ntuple X:A\n",
    )
    .unwrap();
    let t = |i| file.tuple(i).unwrap();
    assert_eq!(regtuple_distance(&t(0), &t(0), 0.5, TOL, false).unwrap(), 0.0);
    assert_eq!(regtuple_distance(&t(0), &t(1), 0.5, TOL, false).unwrap(), 1.0);
    let d = regtuple_distance(&t(2), &t(3), 0.5, TOL, false).unwrap();
    assert!((d - 0.125f64.sqrt()).abs() < 1e-9);
    let n = regtuple_distance(&t(2), &t(3), 0.5, TOL, true).unwrap();
    assert!((n - 0.25).abs() < 1e-9);
    assert_eq!(regtuple_distance(&t(0), &t(4), 0.5, TOL, false), Err(RegTypeError::LengthMismatch(2, 1)));
}

#[test]
fn finite_language_examples() {
    let file = parse_grammars("A ::= a\nL ::= [] | '.'(A, L)\nC ::= a | b\n").unwrap();
    let (lang, done) = finite_language(&file.grammar("A").unwrap(), 1);
    assert!(done && lang == terms(&["a"]));
    let (lang, done) = finite_language(&file.grammar("L").unwrap(), 2);
    assert!(!done);
    assert_eq!(lang, terms(&["[]", "[a]"]));
    let (lang, _) = finite_language(&file.grammar("C").unwrap(), 1);
    assert_eq!(lang, terms(&["a", "b"]));
}

#[test]
fn grammar_of_terms_examples() {
    let g = grammar(&["a"]);
    assert_eq!(g.productions(g.start()).len(), 1);
    let g = grammar(&["f(a)", "f(b)"]);
    assert_eq!(finite_language(&g, 2).0, terms(&["f(a)", "f(b)"]));
    assert_eq!(grammar_of_terms(&BTreeSet::new()), Err(RegTypeError::EmptySet));
    assert!(matches!(grammar_of_terms(&terms(&["f(X)"])), Err(RegTypeError::NonGround(_))));
}

#[test]
fn dprime_is_a_pseudometric_on_sampled_grammars() {
    let sets: [&[&str]; 9] = [
        &["a"],
        &["b"],
        &["a", "b"],
        &["f(a)"],
        &["f(a)", "f(b)"],
        &["f(a)", "g(a,b)"],
        &["[]", "[a]"],
        &["[]", "[a]", "[a,a]"],
        &["g(f(a),b)"],
    ];
    let mut gs: Vec<TypeGrammar> = sets.iter().map(|s| grammar(s)).collect();
    let file = parse_grammars("La ::= [] | '.'(A, La)\nLb ::= [] | '.'(B, Lb)\nA ::= a\nB ::= b\n").unwrap();
    gs.push(file.grammar("La").unwrap());
    gs.push(file.grammar("Lb").unwrap());
    let cfg = CheckConfig { tolerance: 1e-6, ..CheckConfig::default() };
    let r = check_metric_axioms(&gs, |a, b| dprime(a, b, 0.5, TOL).unwrap(), &cfg);
    assert!(r.is_pseudometric(), "{r}");
}

fn ground_term() -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![Just(Term::atom("a")), Just(Term::atom("b")), Just(Term::atom("[]"))];
    leaf.prop_recursive(3, 12, 3, |inner| {
        prop_oneof![
            inner.clone().prop_map(|x| Term::compound("f", vec![x])),
            (inner.clone(), inner.clone()).prop_map(|(x, y)| Term::compound("g", vec![x, y])),
            (inner.clone(), inner.clone(), inner).prop_map(|(x, y, z)| Term::compound("h", vec![x, y, z])),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn dprime_equals_d_term_on_singletons(x in ground_term(), y in ground_term()) {
        let gx = grammar_of_terms(&BTreeSet::from([x.clone()])).unwrap();
        let gy = grammar_of_terms(&BTreeSet::from([y.clone()])).unwrap();
        let d = dprime(&gx, &gy, 0.5, TOL).unwrap();
        let e = d_term(&x, &y, TermMetricParams::default()).unwrap();
        prop_assert!((d - e).abs() < 1e-9, "{} {}: {} vs {}", x, y, d, e);
    }

    #[test]
    fn dprime_is_symmetric_and_bounded(x in ground_term(), y in ground_term(), z in ground_term()) {
        let g1 = grammar_of_terms(&BTreeSet::from([x.clone(), z.clone()]));
        let g2 = grammar_of_terms(&BTreeSet::from([y.clone()])).unwrap();
        if let Ok(g1) = g1 {
            let (a, b) = (dprime(&g1, &g2, 0.5, TOL).unwrap(), dprime(&g2, &g1, 0.5, TOL).unwrap());
            prop_assert!((a - b).abs() < 1e-12 && (0.0..=1.0).contains(&a));
        }
    }
}
