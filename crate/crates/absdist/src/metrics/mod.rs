//! Distances between whole analyses of the same program and entry.

mod ops;
mod tree;

pub use ops::{analysis_size, intersect, translate_base};
pub use tree::{solve_direct, solve_iterative, tree_distance, LinearSystem, PairValue, Solver, TreeDistParams};

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;
use thiserror::Error;

use crate::analyzer::AndOrGraph;
use crate::domain::{AbstractSub, DomainError};
use crate::program::ProgramPoint;

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("analyses are incompatible: {0}")]
    Incompatible(String),
    #[error("analysis graphs have different shapes at {0}")]
    ShapeMismatch(String),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("bad weights: {0}")]
    Weights(String),
    #[error("invalid parameter: {0}")]
    Param(String),
    #[error("no translation from {0} to {1}")]
    NoTranslator(String, String),
}

/// Distance between two abstract substitutions of the same domain.
pub type SubDistance<'a> = dyn Fn(&AbstractSub, &AbstractSub) -> Result<f64, DomainError> + 'a;

/// The normalized metric of the substitutions' own domain.
pub fn domain_metric(a: &AbstractSub, b: &AbstractSub) -> Result<f64, DomainError> {
    a.distance(b)
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct DistanceReport {
    pub metric: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    pub value: f64,
    pub per_point: BTreeMap<String, f64>,
    pub pairs_solved: usize,
    pub iterations: usize,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub pairs: Vec<PairValue>,
}

impl DistanceReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("plain data")
    }
}

/// Both analyses describe the same program and entry in the same domain.
pub fn check_compatible(a: &AndOrGraph, b: &AndOrGraph) -> Result<(), MetricError> {
    if a.domain != b.domain {
        return Err(MetricError::Incompatible(format!("domains {} and {}", a.domain, b.domain)));
    }
    if a.entry != b.entry || a.root().literal != b.root().literal {
        return Err(MetricError::Incompatible(format!("entries {} and {}", a.root().literal, b.root().literal)));
    }
    if a.program_points != b.program_points {
        return Err(MetricError::Incompatible("program points differ".into()));
    }
    Ok(())
}

/// `d(λs¹, λs²)` at the roots.
pub fn top_distance(a: &AndOrGraph, b: &AndOrGraph, d: &SubDistance) -> Result<f64, MetricError> {
    check_compatible(a, b)?;
    Ok(d(&a.root().success, &b.root().success)?)
}

/// Program-point weights summing to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct FlatWeights(BTreeMap<ProgramPoint, f64>);

impl FlatWeights {
    pub fn uniform(points: &[ProgramPoint]) -> Self {
        let w = 1.0 / points.len().max(1) as f64;
        FlatWeights(points.iter().map(|p| (p.clone(), w)).collect())
    }

    pub fn new(weights: BTreeMap<ProgramPoint, f64>) -> Result<Self, MetricError> {
        if let Some((p, w)) = weights.iter().find(|(_, w)| !(**w >= 0.0 && w.is_finite())) {
            return Err(MetricError::Weights(format!("weight {w} for {p} must be non-negative")));
        }
        let total: f64 = weights.values().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(MetricError::Weights(format!("weights sum to {total}, not 1")));
        }
        Ok(FlatWeights(weights))
    }

    /// Reads `pp,weight` rows; a weight may be written as a fraction `a/b`.
    pub fn from_csv(text: &str, known: &[ProgramPoint]) -> Result<Self, MetricError> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(text.as_bytes());
        let mut out = BTreeMap::new();
        for row in rdr.records() {
            let row = row.map_err(|e| MetricError::Weights(e.to_string()))?;
            let (pp, w) = (row.get(0).unwrap_or(""), row.get(1).unwrap_or(""));
            let pp: ProgramPoint = pp.parse().map_err(MetricError::Weights)?;
            if !known.contains(&pp) {
                return Err(MetricError::Weights(format!("unknown program point {pp}")));
            }
            let w = match w.split_once('/') {
                Some((n, d)) => n.parse::<f64>().ok().zip(d.parse::<f64>().ok()).map(|(n, d)| n / d),
                None => w.parse::<f64>().ok(),
            }
            .ok_or_else(|| MetricError::Weights(format!("bad weight `{w}`")))?;
            out.insert(pp, w);
        }
        FlatWeights::new(out)
    }

    pub fn from_csv_file(path: &Path, known: &[ProgramPoint]) -> Result<Self, MetricError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| MetricError::Weights(format!("{}: {e}", path.display())))?;
        FlatWeights::from_csv(&text, known)
    }

    pub fn get(&self, pp: &ProgramPoint) -> f64 {
        self.0.get(pp).copied().unwrap_or(0.0)
    }
}

/// Weighted sum `Σ w(pp)·d(pp)`.
pub fn aggregate(values: &BTreeMap<ProgramPoint, f64>, weights: &FlatWeights) -> f64 {
    values.iter().map(|(pp, d)| weights.get(pp) * d).sum()
}

fn join_at(g: &AndOrGraph, pp: &ProgramPoint) -> Result<Option<(AbstractSub, AbstractSub)>, MetricError> {
    let mut acc: Option<(AbstractSub, AbstractSub)> = None;
    for n in g.nodes.iter().filter(|n| &n.pp == pp) {
        acc = Some(match acc {
            None => (n.call.clone(), n.success.clone()),
            Some((c, s)) => (c.join(&n.call)?, s.join(&n.success)?),
        });
    }
    Ok(acc)
}

/// Per program point, `½(d(⊔calls¹, ⊔calls²) + d(⊔succs¹, ⊔succs²))`;
/// a point reached by only one analysis counts 1. The value is the
/// weighted sum (uniform weights when `weights` is `None`).
pub fn flat_distance(
    a: &AndOrGraph,
    b: &AndOrGraph,
    d: &SubDistance,
    weights: Option<&FlatWeights>,
) -> Result<DistanceReport, MetricError> {
    check_compatible(a, b)?;
    let uniform;
    let weights = match weights {
        Some(w) => w,
        None => {
            uniform = FlatWeights::uniform(&a.program_points);
            &uniform
        }
    };
    let mut values = BTreeMap::new();
    for pp in &a.program_points {
        let v = match (join_at(a, pp)?, join_at(b, pp)?) {
            (None, None) => 0.0,
            (Some((c1, s1)), Some((c2, s2))) => 0.5 * (d(&c1, &c2)? + d(&s1, &s2)?),
            _ => 1.0,
        };
        values.insert(pp.clone(), v);
    }
    Ok(DistanceReport {
        metric: "flat".into(),
        mu: None,
        value: aggregate(&values, weights),
        per_point: values.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        pairs_solved: 0,
        iterations: 0,
        pairs: Vec::new(),
    })
}
