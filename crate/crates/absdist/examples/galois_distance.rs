//! Distances induced through a Galois connection between sets of concrete
//! substitutions and groundness descriptions.

use std::collections::{BTreeMap, BTreeSet};

use absdist::domain::groundness::GroundSub;
use absdist::domain::ConcreteSub;
use absdist::lattice::{check_metric_axioms, induce_on_abstract, CheckConfig, DistanceFn, GaloisPair, MetricClaim};
use absdist::term::Term;

fn universe(with_free: bool) -> Vec<ConcreteSub> {
    let mut values = vec![Term::atom("a"), Term::compound("f", vec![Term::atom("b")])];
    if with_free {
        values.push(Term::var("_F"));
    }
    let mut out = Vec::new();
    for x in &values {
        for y in &values {
            out.push(BTreeMap::from([("X".to_string(), x.clone()), ("Y".to_string(), y.clone())]));
        }
    }
    out
}

fn report(with_free: bool) {
    let vars = vec!["X".to_string(), "Y".to_string()];
    let u = universe(with_free);
    let n = u.len();
    let (ua, va) = (u.clone(), vars.clone());
    let alpha = move |s: &BTreeSet<usize>| {
        let thetas: Vec<ConcreteSub> = s.iter().map(|&i| ua[i].clone()).collect();
        GroundSub::abstract_concrete(&thetas, &va)
    };
    let alpha2 = alpha.clone();
    let gamma = move |a: &GroundSub| {
        (0..n).filter(|&i| alpha2(&BTreeSet::from([i])).try_leq(a).unwrap()).collect::<BTreeSet<usize>>()
    };
    let abstracts = GroundSub::enumerate(&vars);
    let insertion = abstracts.iter().all(|a| alpha(&gamma(a)) == *a);
    let pair = GaloisPair::new(alpha, gamma, insertion);
    let sym_diff = DistanceFn::new(move |a: &BTreeSet<usize>, b: &BTreeSet<usize>| {
        a.symmetric_difference(b).count() as f64 / n as f64
    })
    .with_claim(MetricClaim::Metric);
    let d = induce_on_abstract(&pair, &sym_diff);
    let r = check_metric_axioms(&abstracts, |a, b| d.eval(a, b), &CheckConfig::default());
    println!("{} concrete substitutions, insertion: {insertion}, claim {:?}: {r}", n, d.claim);
}

fn main() {
    report(true);
    report(false);
}
