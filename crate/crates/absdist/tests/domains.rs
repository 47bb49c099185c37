mod common;

use std::collections::BTreeMap;

use absdist::domain::groundness::{gr_distance, GroundSub, GroundVal};
use absdist::domain::sharing::{sh_distance, ShWidenParams, SharingSub};
use absdist::domain::{AbstractSub, ConcreteSub, DomainError};
use absdist::lattice::{check_metric_properties, CheckConfig, Lattice, Property};
use absdist::parser::parse_term;
use absdist::term::Term;
use common::gv;
use proptest::prelude::*;

fn names(vs: &[&str]) -> Vec<String> {
    vs.iter().map(|s| s.to_string()).collect()
}

fn gr(pairs: &[(&str, &str)]) -> GroundSub {
    GroundSub::from_pairs(pairs.iter().map(|(k, v)| (*k, gv(v))))
}

fn sh(vars: &[&str], groups: &[&[&str]]) -> SharingSub {
    let groups: Vec<Vec<&str>> = groups.iter().map(|g| g.to_vec()).collect();
    SharingSub::new(&names(vars), &groups).unwrap()
}

fn t(s: &str) -> Term {
    parse_term(s).unwrap()
}

#[test]
fn groundness_value_order() {
    use GroundVal::*;
    assert_eq!(G.join(Ng), Any);
    assert_eq!(G.meet(Ng), None);
    assert_eq!(Any.meet(Ng), Some(Ng));
    assert!(G.leq(Any) && !Any.leq(G) && !G.leq(Ng));
}

#[test]
fn groundness_join_and_meet() {
    let x = gr(&[("X", "g")]);
    let bot = GroundSub::Bottom;
    assert_eq!(x.try_join(&bot).unwrap(), x);
    assert_eq!(bot.try_join(&x).unwrap(), x);
    assert_eq!(x.try_meet(&bot).unwrap(), bot);
    assert!(x.try_meet(&gr(&[("X", "ng")])).unwrap().is_bottom());
    let a = gr(&[("X", "g"), ("Z", "any")]);
    let b = gr(&[("X", "g"), ("Z", "g")]);
    assert_eq!(a.try_join(&b).unwrap().get("Z"), Some(GroundVal::Any));
    assert!(matches!(x.try_join(&gr(&[("Y", "g")])), Err(DomainError::ScopeMismatch(..))));
}

#[test]
fn groundness_distance_examples() {
    let a = gr(&[("Xs", "g"), ("Ys", "g")]);
    let b = gr(&[("Xs", "g"), ("Ys", "any")]);
    assert!((gr_distance(&a, &b).unwrap() - 0.3536).abs() < 1e-4);
    assert_eq!(gr_distance(&GroundSub::Bottom, &GroundSub::Bottom).unwrap(), 0.0);
    assert_eq!(gr_distance(&GroundSub::Bottom, &a).unwrap(), 1.0);
    let c = gr(&[("Xs", "ng"), ("Ys", "g")]);
    assert!((gr_distance(&a, &c).unwrap() - 0.5f64.sqrt()).abs() < 1e-12);
    assert!(gr_distance(&a, &gr(&[("Xs", "g")])).is_err());
}

#[test]
fn groundness_transfer_examples() {
    assert_eq!(gr(&[("X", "ng")]).unify(&t("X"), &t("[]")), gr(&[("X", "g")]));
    assert_eq!(gr(&[("X", "any"), ("Y", "g")]).unify(&t("X"), &t("f(Y)")), gr(&[("X", "g"), ("Y", "g")]));
    assert_eq!(gr(&[("X", "any")]).assume_ground(&t("X")), gr(&[("X", "g")]));
    assert_eq!(gr(&[("X", "ng")]).assume_var(&t("X")), gr(&[("X", "ng")]));
    assert!(gr(&[("X", "g")]).assume_var(&t("X")).is_bottom());
}

#[test]
fn groundness_metric_axioms_for_two_variables() {
    let all = GroundSub::enumerate(&names(&["X", "Y"]));
    assert_eq!(all.len(), 10);
    let r = check_metric_properties(&all, |a, b| gr_distance(a, b).unwrap(), &CheckConfig::default());
    assert!(r.is_metric(), "{r}");
    assert_eq!(r.count(Property::OrderPreservation), 0, "{r}");
}

#[test]
fn groundness_abstraction_is_monotone() {
    let vars = names(&["X", "Y"]);
    let thetas: Vec<ConcreteSub> = ["a", "_A", "f(_B)", "f(a)"]
        .iter()
        .flat_map(|x| ["b", "_C", "g(_D)"].iter().map(move |y| (x, y)))
        .map(|(x, y)| BTreeMap::from([("X".into(), t(x)), ("Y".into(), t(y))]))
        .collect();
    for i in 0..thetas.len() {
        let one = GroundSub::abstract_concrete(&thetas[i..=i], &vars);
        let more = GroundSub::abstract_concrete(&thetas[i..], &vars);
        assert!(one.try_leq(&more).unwrap());
    }
    let ground = GroundSub::abstract_concrete(&thetas[..1], &vars);
    assert_eq!(ground, gr(&[("X", "g"), ("Y", "g")]));
    assert!(GroundSub::abstract_concrete(&[], &vars).is_bottom());
}

#[test]
fn sharing_size_examples() {
    let xyz = names(&["X", "Y", "Z"]);
    assert_eq!(SharingSub::bottom(&xyz).unwrap().size(), 0);
    assert_eq!(SharingSub::ground(&xyz).unwrap().size(), 1);
    assert_eq!(SharingSub::top(&xyz).unwrap().size(), 8);
}

#[test]
fn sharing_distance_examples() {
    let a = sh(&["X", "Y"], &[&["X"]]);
    let b = sh(&["X", "Y"], &[&["X"], &["X", "Y"]]);
    assert_eq!(sh_distance(&a, &b).unwrap(), 0.25);
    assert_eq!(sh_distance(&a, &a).unwrap(), 0.0);
    for n in 1..=4 {
        let vars: Vec<String> = (0..n).map(|i| format!("V{i}")).collect();
        let (bot, top) = (SharingSub::bottom(&vars).unwrap(), SharingSub::top(&vars).unwrap());
        assert_eq!(sh_distance(&bot, &top).unwrap(), 1.0, "n = {n}");
    }
    assert!(sh_distance(&a, &sh(&["X"], &[])).is_err());
}

#[test]
fn sharing_abstraction_examples() {
    let vars = names(&["X", "Y"]);
    let abs = |x: &str, y: &str| {
        let theta = BTreeMap::from([("X".to_string(), t(x)), ("Y".to_string(), t(y))]);
        SharingSub::abstract_concrete(&[theta], &vars).unwrap()
    };
    assert_eq!(abs("a", "b"), sh(&["X", "Y"], &[]));
    assert_eq!(abs("V", "V"), sh(&["X", "Y"], &[&["X", "Y"]]));
    assert_eq!(abs("f(U,V)", "V"), sh(&["X", "Y"], &[&["X"], &["X", "Y"]]));
}

#[test]
fn amgu_examples() {
    let xy = sh(&["X", "Y"], &[&["X"], &["Y"]]);
    assert_eq!(xy.amgu("X", &t("f(a)")), sh(&["X", "Y"], &[&["Y"]]));
    assert_eq!(xy.amgu("X", &t("Y")), sh(&["X", "Y"], &[&["X", "Y"]]));
    let xyz = sh(&["X", "Y", "Z"], &[&["X"], &["Y"], &["Z"]]);
    assert_eq!(xyz.amgu("X", &t("Y")), sh(&["X", "Y", "Z"], &[&["X", "Y"], &["Z"]]));
}

#[test]
fn widening_examples() {
    let xyz = sh(&["X", "Y", "Z"], &[&["X"], &["Y"], &["Z"]]);
    let two = ShWidenParams::new(2).unwrap();
    let w = xyz.widen(two);
    assert_eq!(w.group_count(), Some(7));
    assert_eq!(xyz.widen(ShWidenParams::new(3).unwrap()), xyz);
    let bot = SharingSub::bottom(&names(&["X"])).unwrap();
    assert_eq!(bot.widen(two), bot);
    assert!(ShWidenParams::new(0).is_err());
    let partial = sh(&["X", "Y", "Z"], &[&["X"], &["Y"], &["X", "Y"]]);
    let w = partial.widen(two);
    assert_eq!(w.occurring(), names(&["X", "Y"]));
}

#[test]
fn sharing_to_groundness() {
    let vars = ["X", "Y"];
    assert_eq!(sh(&vars, &[]).to_gr(), gr(&[("X", "g"), ("Y", "g")]));
    assert_eq!(sh(&vars, &[&["X", "Y"]]).to_gr(), gr(&[("X", "any"), ("Y", "any")]));
    assert!(SharingSub::bottom(&names(&vars)).unwrap().to_gr().is_bottom());
}

#[test]
fn sharing_json_round_trip() {
    let a = AbstractSub::Share(sh(&["X", "Y"], &[&["X"], &["X", "Y"]]));
    assert_eq!(AbstractSub::from_json(&a.to_json()).unwrap(), a);
    let b = AbstractSub::Gr(gr(&[("Xs", "g"), ("Ys", "ng")]));
    assert_eq!(b.to_json()["sub"]["Ys"], "ng");
    assert_eq!(AbstractSub::from_json(&b.to_json()).unwrap(), b);
}

fn all_sharing(n: usize) -> Vec<SharingSub> {
    let vars: Vec<String> = ["X", "Y", "Z"][..n].iter().map(|s| s.to_string()).collect();
    SharingSub::enumerate(&vars).unwrap()
}

#[test]
fn sharing_size_is_modular() {
    for n in 1..=3 {
        let all = all_sharing(n);
        for a in all.iter().filter(|a| !a.is_bottom()) {
            for b in all.iter().filter(|b| !b.is_bottom()) {
                let lhs = a.size() + b.size();
                let rhs = a.meet(b).size() + a.join(b).size();
                assert_eq!(lhs, rhs, "{a} {b}");
            }
        }
    }
}

#[test]
fn sharing_metric_properties_exhaustive() {
    for n in 1..=3 {
        let all = all_sharing(n);
        assert_eq!(all.len(), (1 << ((1 << n) - 1)) + 1);
        let r = check_metric_properties(&all, |a, b| sh_distance(a, b).unwrap(), &CheckConfig::default());
        assert!(r.is_metric(), "n = {n}: {r}");
        assert_eq!(r.count(Property::OrderPreservation), 0, "n = {n}: {r}");
    }
}

#[test]
fn widening_is_extensive_and_idempotent() {
    for k in 1..=4 {
        let p = ShWidenParams::new(k).unwrap();
        for a in all_sharing(3) {
            let w = a.widen(p);
            assert!(a.leq(&w), "{a} -> {w}");
            assert_eq!(w.widen(p), w);
        }
    }
}

/// Robinson unification with occurs check over plain terms.
fn mgu(a: &Term, b: &Term, s: &mut BTreeMap<String, Term>) -> bool {
    let (a, b) = (a.substitute(s), b.substitute(s));
    match (&a, &b) {
        (Term::Var(x), Term::Var(y)) if x == y => true,
        (Term::Var(x), other) | (other, Term::Var(x)) => {
            if other.vars().contains(x) {
                return false;
            }
            let bind = BTreeMap::from([(x.clone(), other.clone())]);
            for v in s.values_mut() {
                *v = v.substitute(&bind);
            }
            s.insert(x.clone(), other.clone());
            true
        }
        (Term::Compound(f, xs), Term::Compound(g, ys)) => {
            f == g && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| mgu(x, y, s))
        }
        _ => a == b,
    }
}

const VALUES: [&str; 6] = ["a", "U", "V", "f(U)", "f(U,V)", "f(V,V)"];
const RHS: [&str; 6] = ["a", "Y", "f(Y)", "f(Y,Z)", "Z", "f(a,Y)"];

fn substitutions() -> Vec<ConcreteSub> {
    let mut out = Vec::new();
    for x in VALUES {
        for y in VALUES {
            for z in VALUES {
                out.push(BTreeMap::from([("X".into(), t(x)), ("Y".into(), t(y)), ("Z".into(), t(z))]));
            }
        }
    }
    out
}

/// Concrete effect of `X = rhs` on `theta`, restricted to the scope.
fn apply_unifier(theta: &ConcreteSub, rhs: &Term) -> Option<ConcreteSub> {
    let mut s = BTreeMap::new();
    if !mgu(&t("X").substitute(theta), &rhs.substitute(theta), &mut s) {
        return None;
    }
    Some(theta.iter().map(|(k, v)| (k.clone(), v.substitute(&s))).collect())
}

#[test]
fn amgu_is_sound_on_enumerated_substitutions() {
    let vars = names(&["X", "Y", "Z"]);
    let thetas = substitutions();
    let mut checked = 0;
    for rhs in RHS.map(t) {
        for theta in &thetas {
            let before = SharingSub::abstract_concrete(std::slice::from_ref(theta), &vars).unwrap();
            let Some(after) = apply_unifier(theta, &rhs) else { continue };
            let concrete = SharingSub::abstract_concrete(&[after], &vars).unwrap();
            let abstract_ = before.amgu("X", &rhs);
            assert!(concrete.leq(&abstract_), "{theta:?} X = {rhs}: {concrete} not below {abstract_}");
            checked += 1;
        }
    }
    assert!(checked > 500);
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn amgu_is_sound_on_substitution_sets(picks in prop::collection::vec(0usize..216, 1..5), r in 0usize..6) {
        let vars = names(&["X", "Y", "Z"]);
        let all = substitutions();
        let set: Vec<ConcreteSub> = picks.iter().map(|&i| all[i].clone()).collect();
        let rhs = t(RHS[r]);
        let before = SharingSub::abstract_concrete(&set, &vars).unwrap();
        let after: Vec<ConcreteSub> = set.iter().filter_map(|th| apply_unifier(th, &rhs)).collect();
        let concrete = SharingSub::abstract_concrete(&after, &vars).unwrap();
        prop_assert!(concrete.leq(&before.amgu("X", &rhs)));
    }

    #[test]
    fn sharing_join_meet_are_bounds(i in 0usize..129, j in 0usize..129) {
        let all = all_sharing(3);
        let (a, b) = (&all[i], &all[j]);
        let (jn, mt) = (a.join(b), a.meet(b));
        prop_assert!(a.leq(&jn) && b.leq(&jn) && mt.leq(a) && mt.leq(b));
    }
}
