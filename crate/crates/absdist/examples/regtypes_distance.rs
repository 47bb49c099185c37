//! Distances between regular type grammars and between finite term sets.

use absdist::regtypes::{dprime, finite_language, grammar_of_terms, parse_grammars, regtuple_distance};
use absdist::term_metric::{d_term, hausdorff_terms, TermMetricParams};

const GRAMMARS: &str = "\
La ::= [] | '.'(A, La)
Lb ::= [] | '.'(B, Lb)
Lab ::= [] | '.'(AB, Lab)
A ::= a
B ::= b
AB ::= a | b
tuple X:La, Y:A
tuple X:Lb, Y:AB
";

fn main() -> anyhow::Result<()> {
    let file = parse_grammars(GRAMMARS)?;
    let (la, lb, lab) = (file.grammar("La")?, file.grammar("Lb")?, file.grammar("Lab")?);
    println!("d(list of a, list of b)      = {:.6}", dprime(&la, &lb, 0.5, 1e-12)?);
    println!("d(list of a, list of a|b)    = {:.6}", dprime(&la, &lab, 0.5, 1e-12)?);
    let (t1, t2) = (file.tuple(0)?, file.tuple(1)?);
    println!("tuple distance (normalized)  = {:.6}", regtuple_distance(&t1, &t2, 0.5, 1e-12, true)?);

    let (short_a, _) = finite_language(&la, 3);
    let (short_b, _) = finite_language(&lb, 3);
    let (xs, ys): (Vec<_>, Vec<_>) = (short_a.iter().cloned().collect(), short_b.iter().cloned().collect());
    let p = TermMetricParams::default();
    println!("lists up to depth 3: {} and {} terms", xs.len(), ys.len());
    println!("hausdorff over those terms   = {:.6}", hausdorff_terms(&xs, &ys, p)?);
    println!("d_term({}, {}) = {:.6}", xs[1], ys[1], d_term(&xs[1], &ys[1], p)?);
    let g = grammar_of_terms(&short_a)?;
    println!("grammar of the depth-3 a-lists:\n{g}");
    Ok(())
}
