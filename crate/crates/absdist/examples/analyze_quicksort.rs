//! Groundness analysis of quicksort, with and without a trusted
//! success pattern for partition/4.

use absdist::analyzer::{analyze, AnalyzeOptions};
use absdist::domain::DomainKind;
use absdist::parser::parse_program;

fn main() -> anyhow::Result<()> {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/data");
    for file in ["quicksort.pl", "quicksort_noimport.pl"] {
        let program = parse_program(&std::fs::read_to_string(format!("{dir}/{file}"))?)?;
        let graph = analyze(&program, None, AnalyzeOptions::new(DomainKind::Gr))?;
        println!("{file}: {} or-nodes", graph.nodes.len());
        for row in graph.node_table() {
            println!("  ({}) {:<16} {:<28} {} -> {}", row.id + 1, row.pp, row.literal, row.call, row.success);
        }
        for id in 0..graph.nodes.len() {
            let kids: Vec<String> =
                graph.children(id).iter().map(|((c, l), to)| format!("{c}.{l}->{}", to + 1)).collect();
            if !kids.is_empty() {
                println!("  children of ({}): {}", id + 1, kids.join(" "));
            }
        }
    }
    Ok(())
}
