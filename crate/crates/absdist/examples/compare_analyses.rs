//! Top, flat and tree distances between the two quicksort analyses.

use absdist::analyzer::{analyze, AnalyzeOptions, AndOrGraph};
use absdist::domain::DomainKind;
use absdist::metrics::{
    aggregate, domain_metric, flat_distance, top_distance, tree_distance, FlatWeights, Solver, TreeDistParams,
};
use absdist::parser::parse_program;

fn load(file: &str) -> anyhow::Result<AndOrGraph> {
    let path = format!("{}/data/{file}", env!("CARGO_MANIFEST_DIR"));
    let program = parse_program(&std::fs::read_to_string(path)?)?;
    Ok(analyze(&program, None, AnalyzeOptions::new(DomainKind::Gr))?)
}

fn main() -> anyhow::Result<()> {
    let (precise, coarse) = (load("quicksort.pl")?, load("quicksort_noimport.pl")?);

    println!("top  {:.4}", top_distance(&precise, &coarse, &domain_metric)?);

    let flat = flat_distance(&precise, &coarse, &domain_metric, None)?;
    for (pp, d) in &flat.per_point {
        println!("flat {pp:<16} {d:.3}");
    }
    println!("flat mean {:.4}", flat.value);

    let csv =
        "pp,weight\nquicksort/2/0,1/2\nquicksort/2/1/1,1/4\nqsort/3/2/1,1/12\nqsort/3/2/2,1/12\nqsort/3/2/3,1/12\n";
    let weights = FlatWeights::from_csv(csv, &precise.program_points)?;
    let per_point = flat.per_point.iter().map(|(k, v)| Ok((k.parse().map_err(anyhow::Error::msg)?, *v)));
    let per_point = per_point.collect::<anyhow::Result<_>>()?;
    println!("flat weighted {:.4}", aggregate(&per_point, &weights));

    for solver in [Solver::Iterative, Solver::Direct] {
        let r = tree_distance(&precise, &coarse, &domain_metric, TreeDistParams::new(0.2, solver, 1e-12)?)?;
        println!("tree {solver:?}: {:.5} over {} node pairs", r.value, r.pairs_solved);
    }
    Ok(())
}
