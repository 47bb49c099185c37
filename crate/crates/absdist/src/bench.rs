//! Precision, time and size benchmark over a corpus of programs.
//!
//! Every configured analysis of a program is translated to the base
//! domain; their position-wise meet is the reference each one is measured
//! against.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::mpsc;
use std::thread;
use std::time::{Duration, Instant};

use serde::Deserialize;
use thiserror::Error;

use crate::analyzer::{analyze, AnalyzeOptions, AndOrGraph};
use crate::domain::sharing::ShWidenParams;
use crate::domain::DomainKind;
use crate::metrics::{
    analysis_size, domain_metric, flat_distance, intersect, top_distance, translate_base, tree_distance, MetricError,
    Solver, TreeDistParams,
};
use crate::parser::parse_program;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("reading {0}: {1}")]
    Io(PathBuf, std::io::Error),
    #[error("bad bench config: {0}")]
    Config(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    Top,
    Flat,
    Tree,
}

impl MetricKind {
    pub fn name(self) -> &'static str {
        match self {
            MetricKind::Top => "top",
            MetricKind::Flat => "flat",
            MetricKind::Tree => "tree",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct DomainSpec {
    pub name: String,
    #[serde(default)]
    pub widen: Option<usize>,
}

impl DomainSpec {
    fn options(&self) -> Result<AnalyzeOptions, BenchError> {
        let kind =
            DomainKind::parse(&self.name).ok_or_else(|| BenchError::Config(format!("unknown domain {}", self.name)))?;
        let mut opts = AnalyzeOptions::new(kind);
        if let Some(k) = self.widen {
            if kind != DomainKind::Share {
                return Err(BenchError::Config(format!("widening is only defined for share, not {}", self.name)));
            }
            opts = opts.widen(ShWidenParams::new(k).map_err(|e| BenchError::Config(e.to_string()))?);
        }
        Ok(opts)
    }
}

fn default_base() -> String {
    "gr".into()
}
fn default_metrics() -> Vec<MetricKind> {
    vec![MetricKind::Top, MetricKind::Flat, MetricKind::Tree]
}
fn default_mu() -> f64 {
    0.2
}
fn default_limit() -> u64 {
    10_000
}

/// Benchmark settings, read from TOML. Relative paths are resolved
/// against the directory of the config file.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct BenchConfig {
    pub corpus: PathBuf,
    pub domains: Vec<DomainSpec>,
    #[serde(default = "default_base")]
    pub base: String,
    #[serde(default = "default_metrics")]
    pub metrics: Vec<MetricKind>,
    #[serde(default = "default_mu")]
    pub mu: f64,
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Where to write a gnuplot script for the CSV.
    #[serde(default)]
    pub gnuplot: Option<PathBuf>,
    #[serde(default = "default_limit")]
    pub time_limit_ms: u64,
}

impl BenchConfig {
    pub fn from_toml(text: &str) -> Result<Self, BenchError> {
        let cfg: BenchConfig = toml::from_str(text).map_err(|e| BenchError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self, BenchError> {
        let text = std::fs::read_to_string(path).map_err(|e| BenchError::Io(path.to_path_buf(), e))?;
        let mut cfg = BenchConfig::from_toml(&text)?;
        let dir = path.parent().unwrap_or(Path::new("."));
        cfg.corpus = dir.join(&cfg.corpus);
        cfg.output = cfg.output.map(|p| dir.join(p));
        cfg.gnuplot = cfg.gnuplot.map(|p| dir.join(p));
        Ok(cfg)
    }

    fn base_kind(&self) -> Result<DomainKind, BenchError> {
        DomainKind::parse(&self.base).ok_or_else(|| BenchError::Config(format!("unknown base domain {}", self.base)))
    }

    fn validate(&self) -> Result<(), BenchError> {
        let base = self.base_kind()?;
        for d in &self.domains {
            let kind = d.options()?.domain;
            if kind != base && !(kind == DomainKind::Share && base == DomainKind::Gr) {
                return Err(BenchError::Config(format!("no translation from {kind} to base {base}")));
            }
        }
        TreeDistParams::new(self.mu, Solver::Iterative, 1e-9).map_err(|e| BenchError::Config(e.to_string()))?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub program: String,
    pub domain: String,
    pub widening: Option<usize>,
    pub metric: String,
    pub distance: Option<f64>,
    pub time_ms: f64,
    pub size: usize,
    /// `ok`, `timeout`, or `error: …`
    pub status: String,
}

struct Run {
    spec: DomainSpec,
    time_ms: f64,
    result: Result<AndOrGraph, String>,
}

fn run_one(program: &crate::program::Program, spec: &DomainSpec, limit: Duration) -> Run {
    let opts = match spec.options() {
        Ok(o) => o,
        Err(e) => return Run { spec: spec.clone(), time_ms: 0.0, result: Err(e.to_string()) },
    };
    let (tx, rx) = mpsc::channel();
    let prog = program.clone();
    thread::spawn(move || {
        let start = Instant::now();
        let g = analyze(&prog, None, opts);
        let _ = tx.send((start.elapsed(), g));
    });
    match rx.recv_timeout(limit) {
        Ok((t, g)) => Run { spec: spec.clone(), time_ms: t.as_secs_f64() * 1e3, result: g.map_err(|e| e.to_string()) },
        Err(_) => Run { spec: spec.clone(), time_ms: limit.as_secs_f64() * 1e3, result: Err("timeout".into()) },
    }
}

fn distance(kind: MetricKind, a: &AndOrGraph, b: &AndOrGraph, mu: f64) -> Result<f64, MetricError> {
    Ok(match kind {
        MetricKind::Top => top_distance(a, b, &domain_metric)?,
        MetricKind::Flat => flat_distance(a, b, &domain_metric, None)?.value,
        MetricKind::Tree => {
            tree_distance(a, b, &domain_metric, TreeDistParams::new(mu, Solver::Iterative, 1e-9)?)?.value
        }
    })
}

/// Rows for one program given its source text.
pub fn bench_program(name: &str, source: &str, cfg: &BenchConfig) -> Result<Vec<BenchRow>, BenchError> {
    cfg.validate()?;
    let base = cfg.base_kind()?;
    let limit = Duration::from_millis(cfg.time_limit_ms);
    let row = |spec: &DomainSpec, metric: MetricKind, distance, time_ms, size, status: String| BenchRow {
        program: name.to_string(),
        domain: spec.name.clone(),
        widening: spec.widen,
        metric: metric.name().to_string(),
        distance,
        time_ms,
        size,
        status,
    };
    let program = match parse_program(source) {
        Ok(p) => p,
        Err(e) => {
            let status = format!("error: {e}");
            return Ok(cfg
                .domains
                .iter()
                .flat_map(|s| cfg.metrics.iter().map(move |&m| (s, m)))
                .map(|(s, m)| row(s, m, None, 0.0, 0, status.clone()))
                .collect());
        }
    };
    let runs: Vec<Run> = cfg.domains.iter().map(|s| run_one(&program, s, limit)).collect();
    let translated: Vec<Option<AndOrGraph>> =
        runs.iter().map(|r| r.result.as_ref().ok().and_then(|g| translate_base(g, base).ok())).collect();
    let present: Vec<AndOrGraph> = translated.iter().flatten().cloned().collect();
    let reference = if present.is_empty() { None } else { intersect(&present).ok() };
    let mut rows = Vec::new();
    for (run, tr) in runs.iter().zip(&translated) {
        let size = run.result.as_ref().map(analysis_size).unwrap_or(0);
        for &m in &cfg.metrics {
            let (d, status) = match (&run.result, tr, &reference) {
                (Err(e), _, _) if e == "timeout" => (None, "timeout".to_string()),
                (Err(e), _, _) => (None, format!("error: {e}")),
                (Ok(_), Some(g), Some(r)) => match distance(m, g, r, cfg.mu) {
                    Ok(d) => (Some(d), "ok".to_string()),
                    Err(e) => (None, format!("error: {e}")),
                },
                _ => (None, "error: no reference analysis".to_string()),
            };
            rows.push(row(&run.spec, m, d, run.time_ms, size, status));
        }
    }
    Ok(rows)
}

/// Runs every `*.pl` file of the corpus. Rows are sorted by program,
/// domain, widening and metric.
pub fn run_bench(cfg: &BenchConfig) -> Result<Vec<BenchRow>, BenchError> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(&cfg.corpus)
        .map_err(|e| BenchError::Io(cfg.corpus.clone(), e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "pl"))
        .collect();
    files.sort();
    let mut rows = Vec::new();
    for f in files {
        let text = std::fs::read_to_string(&f).map_err(|e| BenchError::Io(f.clone(), e))?;
        let name = f.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        rows.extend(bench_program(&name, &text, cfg)?);
    }
    rows.sort_by(|a, b| {
        (&a.program, &a.domain, a.widening, &a.metric).cmp(&(&b.program, &b.domain, b.widening, &b.metric))
    });
    Ok(rows)
}

pub const CSV_HEADER: [&str; 8] = ["program", "domain", "widening", "metric", "distance", "time_ms", "size", "status"];

pub fn write_csv<W: Write>(rows: &[BenchRow], out: W) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.program.clone(),
            r.domain.clone(),
            r.widening.map(|k| k.to_string()).unwrap_or_default(),
            r.metric.clone(),
            r.distance.map(|d| format!("{d:.6}")).unwrap_or_default(),
            format!("{:.3}", r.time_ms),
            r.size.to_string(),
            r.status.clone(),
        ])?;
    }
    w.flush().map_err(|e| BenchError::Io(PathBuf::from("<csv>"), e))?;
    Ok(())
}

/// A gnuplot script plotting distance per program for one metric, reading
/// `csv_path`.
pub fn gnuplot_script(csv_path: &Path, metric: MetricKind) -> String {
    format!(
        "set datafile separator ','\n\
         set key outside\n\
         set style data histogram\n\
         set style fill solid 0.8\n\
         set ylabel 'distance to intersection ({m})'\n\
         set xtics rotate by -45\n\
         plot '{p}' using (strcol(4) eq '{m}' ? $5 : NaN):xtic(1) title columnheader(2)\n",
        m = metric.name(),
        p = csv_path.display()
    )
}
