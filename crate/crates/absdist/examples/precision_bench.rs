//! Runs the bundled benchmark and prints the rows.

use std::path::Path;

use absdist::bench::{run_bench, write_csv, BenchConfig};

fn main() -> anyhow::Result<()> {
    let config = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/bench.toml");
    let cfg = BenchConfig::from_file(&config)?;
    let rows = run_bench(&cfg)?;
    write_csv(&rows, std::io::stdout())?;
    Ok(())
}
