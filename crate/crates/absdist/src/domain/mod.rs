//! Abstract domains and the domain-tagged substitution type.

pub mod groundness;
pub mod sharing;

use std::collections::BTreeMap;
use std::fmt;

use serde_json::{json, Value};
use thiserror::Error;

use crate::term::{term_size, Term};
use groundness::{gr_distance, GroundSub, GroundVal};
use sharing::{sh_distance, SharingSub};

/// A concrete substitution: variable name to (fully dereferenced) term.
pub type ConcreteSub = BTreeMap<String, Term>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DomainError {
    #[error("variable scopes differ: {0:?} vs {1:?}")]
    ScopeMismatch(Vec<String>, Vec<String>),
    #[error("cannot combine a {0} substitution with a {1} substitution")]
    DomainMismatch(&'static str, &'static str),
    #[error("too many variables in scope ({0})")]
    TooManyVars(usize),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DomainKind {
    Gr,
    Share,
}

impl DomainKind {
    pub fn name(self) -> &'static str {
        match self {
            DomainKind::Gr => "gr",
            DomainKind::Share => "share",
        }
    }

    pub fn parse(s: &str) -> Option<DomainKind> {
        match s {
            "gr" => Some(DomainKind::Gr),
            "share" => Some(DomainKind::Share),
            _ => None,
        }
    }
}

impl fmt::Display for DomainKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum AbstractSub {
    Gr(GroundSub),
    Share(SharingSub),
}

impl AbstractSub {
    pub fn kind(&self) -> DomainKind {
        match self {
            AbstractSub::Gr(_) => DomainKind::Gr,
            AbstractSub::Share(_) => DomainKind::Share,
        }
    }

    pub fn is_bottom(&self) -> bool {
        match self {
            AbstractSub::Gr(g) => g.is_bottom(),
            AbstractSub::Share(s) => s.is_bottom(),
        }
    }

    fn mismatch(&self, other: &AbstractSub) -> DomainError {
        DomainError::DomainMismatch(self.kind().name(), other.kind().name())
    }

    pub fn join(&self, other: &AbstractSub) -> Result<AbstractSub, DomainError> {
        match (self, other) {
            (AbstractSub::Gr(a), AbstractSub::Gr(b)) => Ok(AbstractSub::Gr(a.try_join(b)?)),
            (AbstractSub::Share(a), AbstractSub::Share(b)) => Ok(AbstractSub::Share(a.try_join(b)?)),
            _ => Err(self.mismatch(other)),
        }
    }

    pub fn meet(&self, other: &AbstractSub) -> Result<AbstractSub, DomainError> {
        match (self, other) {
            (AbstractSub::Gr(a), AbstractSub::Gr(b)) => Ok(AbstractSub::Gr(a.try_meet(b)?)),
            (AbstractSub::Share(a), AbstractSub::Share(b)) => Ok(AbstractSub::Share(a.try_meet(b)?)),
            _ => Err(self.mismatch(other)),
        }
    }

    pub fn leq(&self, other: &AbstractSub) -> Result<bool, DomainError> {
        match (self, other) {
            (AbstractSub::Gr(a), AbstractSub::Gr(b)) => a.try_leq(b),
            (AbstractSub::Share(a), AbstractSub::Share(b)) => a.try_leq(b),
            _ => Err(self.mismatch(other)),
        }
    }

    /// The domain's normalized metric.
    pub fn distance(&self, other: &AbstractSub) -> Result<f64, DomainError> {
        match (self, other) {
            (AbstractSub::Gr(a), AbstractSub::Gr(b)) => gr_distance(a, b),
            (AbstractSub::Share(a), AbstractSub::Share(b)) => sh_distance(a, b),
            _ => Err(self.mismatch(other)),
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            AbstractSub::Gr(GroundSub::Bottom) => json!({"dom": "gr", "sub": "bot"}),
            AbstractSub::Gr(GroundSub::Map(m)) => {
                let sub: serde_json::Map<String, Value> =
                    m.iter().map(|(k, v)| (k.clone(), Value::from(v.as_str()))).collect();
                json!({"dom": "gr", "sub": sub})
            }
            AbstractSub::Share(s) => {
                let sub = match s.groups() {
                    None => Value::from("bot"),
                    Some(gs) => json!(gs),
                };
                json!({"dom": "share", "vars": s.vars(), "sub": sub})
            }
        }
    }

    pub fn from_json(v: &Value) -> Result<AbstractSub, DomainError> {
        let bad = |msg: &str| DomainError::Invalid(format!("bad substitution encoding: {msg}"));
        let sub = v.get("sub").ok_or_else(|| bad("missing `sub`"))?;
        match v.get("dom").and_then(Value::as_str) {
            Some("gr") => {
                if sub.as_str() == Some("bot") {
                    return Ok(AbstractSub::Gr(GroundSub::Bottom));
                }
                let obj = sub.as_object().ok_or_else(|| bad("gr `sub` must be an object"))?;
                let mut m = BTreeMap::new();
                for (k, val) in obj {
                    let g = val
                        .as_str()
                        .and_then(GroundVal::parse)
                        .ok_or_else(|| bad("groundness values are g, ng or any"))?;
                    m.insert(k.clone(), g);
                }
                Ok(AbstractSub::Gr(GroundSub::Map(m)))
            }
            Some("share") => {
                let groups: Option<Vec<Vec<String>>> = if sub.as_str() == Some("bot") {
                    None
                } else {
                    Some(serde_json::from_value(sub.clone()).map_err(|e| bad(&e.to_string()))?)
                };
                let vars: Vec<String> = match v.get("vars") {
                    Some(vs) => serde_json::from_value(vs.clone()).map_err(|e| bad(&e.to_string()))?,
                    None => {
                        let mut all: Vec<String> = groups.iter().flatten().flatten().cloned().collect();
                        all.sort();
                        all.dedup();
                        all
                    }
                };
                Ok(AbstractSub::Share(match groups {
                    None => SharingSub::bottom(&vars)?,
                    Some(gs) => SharingSub::new(&vars, &gs)?,
                }))
            }
            _ => Err(bad("`dom` must be gr or share")),
        }
    }

    /// Number of functor and constant symbols in the canonical rendering:
    /// two constants (name, value) per groundness entry, the list-of-lists
    /// term for a sharing set, and one constant for ⊥.
    pub fn symbol_count(&self) -> usize {
        match self {
            _ if self.is_bottom() => 1,
            AbstractSub::Gr(g) => 2 * g.vars().len(),
            AbstractSub::Share(s) => {
                let groups = s
                    .groups()
                    .unwrap_or_default()
                    .into_iter()
                    .map(|g| Term::list(g.into_iter().map(Term::atom).collect::<Vec<_>>(), Term::nil()));
                term_size(&Term::list(groups.collect::<Vec<_>>(), Term::nil()))
            }
        }
    }
}

impl fmt::Display for AbstractSub {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AbstractSub::Gr(g) => g.fmt(f),
            AbstractSub::Share(s) => s.fmt(f),
        }
    }
}
