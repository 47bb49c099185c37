//! Groundness domain: each variable is definitely ground (`g`), definitely
//! not ground (`ng`) or unknown (`any`). A substitution is either ⊥ or a total
//! map from the variables in scope.

use std::collections::BTreeMap;
use std::fmt;

use crate::domain::{ConcreteSub, DomainError};
use crate::lattice::{product_distance, Lattice};
use crate::term::Term;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GroundVal {
    G,
    Ng,
    Any,
}

impl GroundVal {
    pub const ALL: [GroundVal; 3] = [GroundVal::G, GroundVal::Ng, GroundVal::Any];

    pub fn leq(self, other: GroundVal) -> bool {
        self == other || other == GroundVal::Any
    }

    pub fn join(self, other: GroundVal) -> GroundVal {
        if self == other {
            self
        } else {
            GroundVal::Any
        }
    }

    /// `None` is ⊥ (`g ⊓ ng`).
    pub fn meet(self, other: GroundVal) -> Option<GroundVal> {
        match (self, other) {
            (a, GroundVal::Any) => Some(a),
            (GroundVal::Any, b) => Some(b),
            (a, b) if a == b => Some(a),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            GroundVal::G => "g",
            GroundVal::Ng => "ng",
            GroundVal::Any => "any",
        }
    }

    pub fn parse(s: &str) -> Option<GroundVal> {
        match s {
            "g" => Some(GroundVal::G),
            "ng" => Some(GroundVal::Ng),
            "any" => Some(GroundVal::Any),
            _ => None,
        }
    }
}

/// Half the path length in the Hasse diagram `g - any - ng`.
pub fn var_metric(a: GroundVal, b: GroundVal) -> f64 {
    if a == b {
        0.0
    } else if a == GroundVal::Any || b == GroundVal::Any {
        0.5
    } else {
        1.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GroundSub {
    Bottom,
    Map(BTreeMap<String, GroundVal>),
}

impl GroundSub {
    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, GroundVal)>) -> GroundSub {
        GroundSub::Map(pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect())
    }

    /// Every variable `ng`: fresh, unbound variables.
    pub fn fresh(vars: &[String]) -> GroundSub {
        GroundSub::Map(vars.iter().map(|v| (v.clone(), GroundVal::Ng)).collect())
    }

    pub fn top(vars: &[String]) -> GroundSub {
        GroundSub::Map(vars.iter().map(|v| (v.clone(), GroundVal::Any)).collect())
    }

    pub fn is_bottom(&self) -> bool {
        matches!(self, GroundSub::Bottom)
    }

    pub fn vars(&self) -> Vec<String> {
        match self {
            GroundSub::Bottom => Vec::new(),
            GroundSub::Map(m) => m.keys().cloned().collect(),
        }
    }

    pub fn get(&self, var: &str) -> Option<GroundVal> {
        match self {
            GroundSub::Bottom => None,
            GroundSub::Map(m) => m.get(var).copied(),
        }
    }

    fn check_scope(&self, other: &GroundSub) -> Result<(), DomainError> {
        if let (GroundSub::Map(a), GroundSub::Map(b)) = (self, other) {
            if !a.keys().eq(b.keys()) {
                return Err(DomainError::ScopeMismatch(self.vars(), other.vars()));
            }
        }
        Ok(())
    }

    pub fn try_join(&self, other: &GroundSub) -> Result<GroundSub, DomainError> {
        self.check_scope(other)?;
        Ok(match (self, other) {
            (GroundSub::Bottom, x) | (x, GroundSub::Bottom) => x.clone(),
            (GroundSub::Map(a), GroundSub::Map(b)) => {
                GroundSub::Map(a.iter().map(|(k, v)| (k.clone(), v.join(b[k]))).collect())
            }
        })
    }

    pub fn try_meet(&self, other: &GroundSub) -> Result<GroundSub, DomainError> {
        self.check_scope(other)?;
        Ok(match (self, other) {
            (GroundSub::Bottom, _) | (_, GroundSub::Bottom) => GroundSub::Bottom,
            (GroundSub::Map(a), GroundSub::Map(b)) => {
                let mut out = BTreeMap::new();
                for (k, v) in a {
                    match v.meet(b[k]) {
                        Some(m) => out.insert(k.clone(), m),
                        None => return Ok(GroundSub::Bottom),
                    };
                }
                GroundSub::Map(out)
            }
        })
    }

    pub fn try_leq(&self, other: &GroundSub) -> Result<bool, DomainError> {
        self.check_scope(other)?;
        Ok(match (self, other) {
            (GroundSub::Bottom, _) => true,
            (_, GroundSub::Bottom) => false,
            (GroundSub::Map(a), GroundSub::Map(b)) => a.iter().all(|(k, v)| v.leq(b[k])),
        })
    }

    /// Restricts the map to `vars`; variables not in scope are ignored.
    pub fn project(&self, vars: &[String]) -> GroundSub {
        match self {
            GroundSub::Bottom => GroundSub::Bottom,
            GroundSub::Map(m) => {
                GroundSub::Map(vars.iter().filter_map(|v| m.get(v).map(|g| (v.clone(), *g))).collect())
            }
        }
    }

    /// Groundness of a term: `g` if all its variables are, `ng` if one of
    /// them is definitely non-ground, `any` otherwise.
    pub fn term_value(&self, t: &Term) -> GroundVal {
        let mut acc = GroundVal::G;
        for v in t.vars() {
            match self.get(&v).unwrap_or(GroundVal::Any) {
                GroundVal::Ng => return GroundVal::Ng,
                GroundVal::Any => acc = GroundVal::Any,
                GroundVal::G => {}
            }
        }
        acc
    }

    fn set_all(&mut self, vars: impl IntoIterator<Item = String>, val: GroundVal) {
        if let GroundSub::Map(m) = self {
            for v in vars {
                m.insert(v, val);
            }
        }
    }

    /// Abstract unification `s = t`.
    pub fn unify(&self, s: &Term, t: &Term) -> GroundSub {
        if self.is_bottom() {
            return GroundSub::Bottom;
        }
        match (s, t) {
            (Term::Var(_), _) | (_, Term::Var(_)) => {}
            _ => {
                if s.functor() != t.functor() {
                    return GroundSub::Bottom;
                }
                return s.args().iter().zip(t.args()).fold(self.clone(), |acc, (a, b)| acc.unify(a, b));
            }
        }
        let (vs, vt) = (self.term_value(s), self.term_value(t));
        let mut vars = s.vars();
        t.collect_vars(&mut vars);
        let mut out = self.clone();
        if vs == GroundVal::G || vt == GroundVal::G {
            out.set_all(vars, GroundVal::G);
        } else {
            let loose: Vec<String> = vars.into_iter().filter(|v| self.get(v) != Some(GroundVal::G)).collect();
            out.set_all(loose, GroundVal::Any);
        }
        out
    }

    /// Success of `ground(t)`.
    pub fn assume_ground(&self, t: &Term) -> GroundSub {
        if self.is_bottom() || self.term_value(t) == GroundVal::Ng {
            return GroundSub::Bottom;
        }
        let mut out = self.clone();
        out.set_all(t.vars(), GroundVal::G);
        out
    }

    /// Success of `var(t)`.
    pub fn assume_var(&self, t: &Term) -> GroundSub {
        match t {
            Term::Var(v) => match self.get(v) {
                None => GroundSub::Bottom,
                Some(GroundVal::G) => GroundSub::Bottom,
                Some(_) => {
                    let mut out = self.clone();
                    out.set_all([v.clone()], GroundVal::Ng);
                    out
                }
            },
            _ => GroundSub::Bottom,
        }
    }

    /// Forgets everything about `vars` except definite groundness.
    pub fn top_on(&self, vars: &[String]) -> GroundSub {
        let loose: Vec<String> = vars.iter().filter(|v| self.get(v) != Some(GroundVal::G)).cloned().collect();
        let mut out = self.clone();
        out.set_all(loose, GroundVal::Any);
        out
    }

    /// Abstraction of a finite set of concrete substitutions over `vars`.
    pub fn abstract_concrete(thetas: &[ConcreteSub], vars: &[String]) -> GroundSub {
        thetas.iter().fold(GroundSub::Bottom, |acc, theta| {
            let one = GroundSub::Map(
                vars.iter()
                    .map(|v| {
                        let ground = theta.get(v).map(Term::is_ground).unwrap_or(false);
                        (v.clone(), if ground { GroundVal::G } else { GroundVal::Ng })
                    })
                    .collect(),
            );
            acc.try_join(&one).expect("same scope")
        })
    }

    /// All elements over `vars`, ⊥ first.
    pub fn enumerate(vars: &[String]) -> Vec<GroundSub> {
        let mut maps = vec![BTreeMap::new()];
        for v in vars {
            maps = maps
                .into_iter()
                .flat_map(|m| {
                    GroundVal::ALL.into_iter().map(move |g| {
                        let mut m = m.clone();
                        m.insert(v.clone(), g);
                        m
                    })
                })
                .collect();
        }
        std::iter::once(GroundSub::Bottom).chain(maps.into_iter().map(GroundSub::Map)).collect()
    }
}

/// Per-variable [`var_metric`] combined by the normalized 2-norm;
/// `d(⊥, ⊥) = 0` and `d(⊥, λ) = 1`.
pub fn gr_distance(a: &GroundSub, b: &GroundSub) -> Result<f64, DomainError> {
    a.check_scope(b)?;
    Ok(match (a, b) {
        (GroundSub::Bottom, GroundSub::Bottom) => 0.0,
        (GroundSub::Bottom, _) | (_, GroundSub::Bottom) => 1.0,
        (GroundSub::Map(x), GroundSub::Map(y)) => {
            let ds: Vec<f64> = x.iter().map(|(k, v)| var_metric(*v, y[k])).collect();
            product_distance(&ds, true)
        }
    })
}

impl Lattice for GroundSub {
    fn leq(&self, other: &Self) -> bool {
        self.try_leq(other).expect("groundness scopes must match")
    }

    fn join(&self, other: &Self) -> Self {
        self.try_join(other).expect("groundness scopes must match")
    }

    fn meet(&self, other: &Self) -> Self {
        self.try_meet(other).expect("groundness scopes must match")
    }
}

impl fmt::Display for GroundSub {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroundSub::Bottom => f.write_str("bot"),
            GroundSub::Map(m) => {
                f.write_str("{")?;
                for (i, (k, v)) in m.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{k}/{}", v.as_str())?;
                }
                f.write_str("}")
            }
        }
    }
}
