use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use absdist::analyzer::{analyze, AnalysisError, AnalyzeOptions, AndOrGraph};
use absdist::bench::{gnuplot_script, run_bench, write_csv, BenchConfig, MetricKind};
use absdist::domain::sharing::ShWidenParams;
use absdist::domain::DomainKind;
use absdist::metrics::{
    domain_metric, flat_distance, intersect, top_distance, translate_base, tree_distance, DistanceReport, FlatWeights,
    MetricError, Solver, TreeDistParams,
};
use absdist::parser::parse_program;
use absdist::program::PredKey;
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "absdist", version, about = "Analyze logic programs and measure the distance between analyses")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Domain {
    Gr,
    Share,
}

impl From<Domain> for DomainKind {
    fn from(d: Domain) -> Self {
        match d {
            Domain::Gr => DomainKind::Gr,
            Domain::Share => DomainKind::Share,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Metric {
    Top,
    Flat,
    Tree,
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverArg {
    Iterative,
    Direct,
}

#[derive(Subcommand)]
enum Cmd {
    /// Analyze a program and write its AND-OR graph as JSON.
    Analyze {
        program: PathBuf,
        #[arg(long, value_enum, default_value = "gr")]
        domain: Domain,
        /// Widen sharing call patterns with more than N groups.
        #[arg(long, value_name = "N")]
        widen_share: Option<usize>,
        /// Entry predicate as name/arity; defaults to the first entry.
        #[arg(long)]
        entry: Option<String>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Distance between two analyses of the same program and entry.
    Compare {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, value_enum, default_value = "tree")]
        metric: Metric,
        #[arg(long, default_value_t = 0.2)]
        mu: f64,
        #[arg(long, value_enum, default_value = "iterative")]
        solver: SolverArg,
        /// Domain both analyses are translated to first.
        #[arg(long, value_enum)]
        base: Option<Domain>,
        /// CSV file of `pp,weight` rows for the flat metric.
        #[arg(long)]
        weights: Option<PathBuf>,
    },
    /// Position-wise meet of several analyses.
    Intersect {
        #[arg(required = true)]
        analyses: Vec<PathBuf>,
        #[arg(long, value_enum)]
        base: Option<Domain>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run the benchmark described by a TOML config.
    Bench {
        config: PathBuf,
        /// CSV destination; overrides the config.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

struct Failure(u8, String);

impl From<MetricError> for Failure {
    fn from(e: MetricError) -> Self {
        let code = match e {
            MetricError::Weights(_) | MetricError::Param(_) => 1,
            _ => 4,
        };
        Failure(code, e.to_string())
    }
}

fn io<T, E: std::fmt::Display>(r: Result<T, E>, what: &Path) -> Result<T, Failure> {
    r.map_err(|e| Failure(1, format!("{}: {e}", what.display())))
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(p) => io(std::fs::write(p, text), p),
        None => {
            let _ = writeln!(std::io::stdout().lock(), "{text}");
            Ok(())
        }
    }
}

fn load(path: &Path) -> Result<AndOrGraph, Failure> {
    let text = io(std::fs::read_to_string(path), path)?;
    let v: serde_json::Value = io(serde_json::from_str(&text), path)?;
    io(AndOrGraph::from_json(&v), path)
}

fn rebase(g: AndOrGraph, base: Option<Domain>) -> Result<AndOrGraph, Failure> {
    match base {
        Some(b) => Ok(translate_base(&g, b.into())?),
        None => Ok(g),
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.cmd {
        Cmd::Analyze { program, domain, widen_share, entry, output } => {
            let text = io(std::fs::read_to_string(&program), &program)?;
            let prog = parse_program(&text).map_err(|e| Failure(2, format!("{}: {e}", program.display())))?;
            let entry: Option<PredKey> = entry.map(|e| e.parse()).transpose().map_err(|e: String| Failure(2, e))?;
            let mut opts = AnalyzeOptions::new(domain.into());
            if let Some(k) = widen_share {
                opts = opts.widen(ShWidenParams::new(k).map_err(|e| Failure(1, e.to_string()))?);
            }
            let g = analyze(&prog, entry.as_ref(), opts).map_err(|e| match e {
                AnalysisError::MissingEntry(_) | AnalysisError::Entry(_) => Failure(2, e.to_string()),
                _ => Failure(3, e.to_string()),
            })?;
            emit(&serde_json::to_string_pretty(&g.to_json()).expect("json"), output.as_deref())
        }
        Cmd::Compare { a, b, metric, mu, solver, base, weights } => {
            let (ga, gb) = (rebase(load(&a)?, base)?, rebase(load(&b)?, base)?);
            let report = match metric {
                Metric::Top => DistanceReport {
                    metric: "top".into(),
                    mu: None,
                    value: top_distance(&ga, &gb, &domain_metric)?,
                    per_point: BTreeMap::new(),
                    pairs_solved: 1,
                    iterations: 0,
                    pairs: Vec::new(),
                },
                Metric::Flat => {
                    let w =
                        weights.as_deref().map(|p| FlatWeights::from_csv_file(p, &ga.program_points)).transpose()?;
                    flat_distance(&ga, &gb, &domain_metric, w.as_ref())?
                }
                Metric::Tree => {
                    let solver = match solver {
                        SolverArg::Iterative => Solver::Iterative,
                        SolverArg::Direct => Solver::Direct,
                    };
                    tree_distance(&ga, &gb, &domain_metric, TreeDistParams::new(mu, solver, 1e-9)?)?
                }
            };
            emit(&serde_json::to_string_pretty(&report).expect("json"), None)
        }
        Cmd::Intersect { analyses, base, output } => {
            let graphs = analyses.iter().map(|p| rebase(load(p)?, base)).collect::<Result<Vec<_>, _>>()?;
            let g = intersect(&graphs)?;
            emit(&serde_json::to_string_pretty(&g.to_json()).expect("json"), output.as_deref())
        }
        Cmd::Bench { config, output } => {
            let mut cfg = BenchConfig::from_file(&config).map_err(|e| Failure(1, e.to_string()))?;
            if output.is_some() {
                cfg.output = output;
            }
            let rows = run_bench(&cfg).map_err(|e| Failure(1, e.to_string()))?;
            match &cfg.output {
                Some(p) => {
                    let f = io(std::fs::File::create(p), p)?;
                    write_csv(&rows, f).map_err(|e| Failure(1, e.to_string()))?;
                    if let Some(gp) = &cfg.gnuplot {
                        let metric = cfg.metrics.first().copied().unwrap_or(MetricKind::Flat);
                        io(std::fs::write(gp, gnuplot_script(p, metric)), gp)?;
                    }
                    eprintln!("wrote {} rows to {}", rows.len(), p.display());
                }
                None => write_csv(&rows, std::io::stdout()).map_err(|e| Failure(1, e.to_string()))?,
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure(code, msg)) => {
            eprintln!("absdist: {msg}");
            ExitCode::from(code)
        }
    }
}
