//! Distance between ground terms and its Hausdorff lifting to term sets.

use thiserror::Error;

use crate::lattice::{hausdorff, LatticeError};
use crate::term::Term;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TermMetricError {
    #[error("term distance is defined on ground terms only, got `{0}`")]
    NonGround(String),
    #[error("contraction factor must lie in (0, 1), got {0}")]
    BadFactor(f64),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// Contraction factor `p` applied at each level of nesting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TermMetricParams {
    p: f64,
}

impl TermMetricParams {
    pub fn new(p: f64) -> Result<Self, TermMetricError> {
        if p > 0.0 && p < 1.0 {
            Ok(TermMetricParams { p })
        } else {
            Err(TermMetricError::BadFactor(p))
        }
    }

    pub fn p(&self) -> f64 {
        self.p
    }
}

impl Default for TermMetricParams {
    fn default() -> Self {
        TermMetricParams { p: 0.5 }
    }
}

/// 1 if the principal functors differ, otherwise `p/n · Σ d(xᵢ, yᵢ)`.
pub fn d_term(t1: &Term, t2: &Term, params: TermMetricParams) -> Result<f64, TermMetricError> {
    for t in [t1, t2] {
        if !t.is_ground() {
            return Err(TermMetricError::NonGround(t.to_string()));
        }
    }
    Ok(d_ground(t1, t2, params.p))
}

fn d_ground(t1: &Term, t2: &Term, p: f64) -> f64 {
    if t1.functor() != t2.functor() {
        return 1.0;
    }
    let (xs, ys) = (t1.args(), t2.args());
    if xs.is_empty() {
        return 0.0;
    }
    let n = xs.len() as f64;
    p * xs.iter().zip(ys).map(|(x, y)| d_ground(x, y, p)).sum::<f64>() / n
}

/// Hausdorff distance between two finite non-empty sets of ground terms.
pub fn hausdorff_terms(a: &[Term], b: &[Term], params: TermMetricParams) -> Result<f64, TermMetricError> {
    if let Some(t) = a.iter().chain(b).find(|t| !t.is_ground()) {
        return Err(TermMetricError::NonGround(t.to_string()));
    }
    Ok(hausdorff(|x, y| d_ground(x, y, params.p), a, b)?)
}
