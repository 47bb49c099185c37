//! Set-sharing domain. Groups are bitmasks over a sorted variable scope.

use std::collections::BTreeSet;
use std::fmt;

use crate::domain::groundness::{GroundSub, GroundVal};
use crate::domain::{ConcreteSub, DomainError};
use crate::lattice::Lattice;
use crate::term::Term;

pub const MAX_VARS: usize = 63;

type Group = u64;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SharingSub {
    vars: Vec<String>,
    /// `None` is ⊥.
    groups: Option<BTreeSet<Group>>,
}

/// Cardinality widening: more than `threshold` groups jumps to ⊤.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShWidenParams {
    threshold: usize,
}

impl ShWidenParams {
    pub fn new(threshold: usize) -> Result<Self, DomainError> {
        if threshold == 0 {
            return Err(DomainError::Invalid("widening threshold must be at least 1".into()));
        }
        Ok(ShWidenParams { threshold })
    }

    pub fn threshold(&self) -> usize {
        self.threshold
    }
}

fn sorted_scope(vars: &[String]) -> Result<Vec<String>, DomainError> {
    let set: BTreeSet<&String> = vars.iter().collect();
    if set.len() > MAX_VARS {
        return Err(DomainError::TooManyVars(set.len()));
    }
    Ok(set.into_iter().cloned().collect())
}

fn star(rel: &BTreeSet<Group>) -> BTreeSet<Group> {
    let mut out: BTreeSet<Group> = BTreeSet::new();
    for &g in rel {
        let more: Vec<Group> = out.iter().map(|r| r | g).collect();
        out.insert(g);
        out.extend(more);
    }
    out
}

impl SharingSub {
    pub fn bottom(vars: &[String]) -> Result<Self, DomainError> {
        Ok(SharingSub { vars: sorted_scope(vars)?, groups: None })
    }

    /// No groups: every variable ground.
    pub fn ground(vars: &[String]) -> Result<Self, DomainError> {
        Ok(SharingSub { vars: sorted_scope(vars)?, groups: Some(BTreeSet::new()) })
    }

    /// Every variable free and independent.
    pub fn fresh(vars: &[String]) -> Result<Self, DomainError> {
        let vars = sorted_scope(vars)?;
        let groups = (0..vars.len()).map(|i| 1 << i).collect();
        Ok(SharingSub { vars, groups: Some(groups) })
    }

    /// All non-empty subsets of the scope.
    pub fn top(vars: &[String]) -> Result<Self, DomainError> {
        let vars = sorted_scope(vars)?;
        if vars.len() > 20 {
            return Err(DomainError::TooManyVars(vars.len()));
        }
        let groups = (1..(1u64 << vars.len())).collect();
        Ok(SharingSub { vars, groups: Some(groups) })
    }

    pub fn new<S: AsRef<str>>(vars: &[String], groups: &[Vec<S>]) -> Result<Self, DomainError> {
        let mut sub = SharingSub::ground(vars)?;
        let set = sub.groups.as_mut().expect("non-bottom");
        for g in groups {
            let mut mask = 0;
            for v in g {
                mask |= sub
                    .vars
                    .iter()
                    .position(|x| x == v.as_ref())
                    .map(|i| 1 << i)
                    .ok_or_else(|| DomainError::Invalid(format!("variable {} is not in scope", v.as_ref())))?;
            }
            if mask == 0 {
                return Err(DomainError::Invalid("sharing groups must be non-empty".into()));
            }
            set.insert(mask);
        }
        Ok(sub)
    }

    pub fn is_bottom(&self) -> bool {
        self.groups.is_none()
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn group_count(&self) -> Option<usize> {
        self.groups.as_ref().map(BTreeSet::len)
    }

    /// Groups as sorted variable lists, in lexicographic order; `None` for ⊥.
    pub fn groups(&self) -> Option<Vec<Vec<String>>> {
        let mut out: Vec<Vec<String>> = self.groups.as_ref()?.iter().map(|&g| self.names(g)).collect();
        out.sort();
        Some(out)
    }

    fn names(&self, g: Group) -> Vec<String> {
        self.vars.iter().enumerate().filter(|(i, _)| g & (1 << i) != 0).map(|(_, v)| v.clone()).collect()
    }

    fn mask_of(&self, vars: &[String]) -> Group {
        vars.iter().filter_map(|v| self.vars.iter().position(|x| x == v)).fold(0, |m, i| m | (1 << i))
    }

    fn check_scope(&self, other: &SharingSub) -> Result<(), DomainError> {
        if self.vars != other.vars {
            return Err(DomainError::ScopeMismatch(self.vars.clone(), other.vars.clone()));
        }
        Ok(())
    }

    /// `|a| + 1`, and 0 for ⊥.
    pub fn size(&self) -> usize {
        self.groups.as_ref().map_or(0, |g| g.len() + 1)
    }

    pub fn try_join(&self, other: &SharingSub) -> Result<SharingSub, DomainError> {
        self.check_scope(other)?;
        let groups = match (&self.groups, &other.groups) {
            (None, g) | (g, None) => g.clone(),
            (Some(a), Some(b)) => Some(a.union(b).copied().collect()),
        };
        Ok(SharingSub { vars: self.vars.clone(), groups })
    }

    pub fn try_meet(&self, other: &SharingSub) -> Result<SharingSub, DomainError> {
        self.check_scope(other)?;
        let groups = match (&self.groups, &other.groups) {
            (Some(a), Some(b)) => Some(a.intersection(b).copied().collect()),
            _ => None,
        };
        Ok(SharingSub { vars: self.vars.clone(), groups })
    }

    pub fn try_leq(&self, other: &SharingSub) -> Result<bool, DomainError> {
        self.check_scope(other)?;
        Ok(match (&self.groups, &other.groups) {
            (None, _) => true,
            (_, None) => false,
            (Some(a), Some(b)) => a.is_subset(b),
        })
    }

    /// Variables occurring in some group.
    pub fn occurring(&self) -> Vec<String> {
        let all = self.groups.iter().flatten().fold(0, |m, g| m | g);
        self.names(all)
    }

    /// Abstract unification of a variable with a term (Jacobs-Langen).
    pub fn amgu(&self, x: &str, t: &Term) -> SharingSub {
        let Some(sh) = &self.groups else {
            return self.clone();
        };
        let mx = self.mask_of(&[x.to_string()]);
        let mt = self.mask_of(&t.vars());
        let (rel_x, rel_t): (BTreeSet<Group>, BTreeSet<Group>) = (
            sh.iter().copied().filter(|g| g & mx != 0).collect(),
            sh.iter().copied().filter(|g| g & mt != 0).collect(),
        );
        let mut out: BTreeSet<Group> = sh.iter().copied().filter(|g| g & (mx | mt) == 0).collect();
        let (sx, st) = (star(&rel_x), star(&rel_t));
        for a in &sx {
            for b in &st {
                out.insert(a | b);
            }
        }
        SharingSub { vars: self.vars.clone(), groups: Some(out) }
    }

    /// `s = t`: structural decomposition, then [`SharingSub::amgu`] on each
    /// variable binding. Clashing functors give ⊥.
    pub fn unify(&self, s: &Term, t: &Term) -> SharingSub {
        if self.is_bottom() {
            return self.clone();
        }
        match (s, t) {
            (Term::Var(x), _) => self.amgu(x, t),
            (_, Term::Var(y)) => self.amgu(y, s),
            _ if s.functor() != t.functor() => SharingSub { vars: self.vars.clone(), groups: None },
            _ => s.args().iter().zip(t.args()).fold(self.clone(), |acc, (a, b)| acc.unify(a, b)),
        }
    }

    /// Success of `ground(t)`: groups touching `t` disappear.
    pub fn assume_ground(&self, t: &Term) -> SharingSub {
        let m = self.mask_of(&t.vars());
        SharingSub {
            vars: self.vars.clone(),
            groups: self.groups.as_ref().map(|sh| sh.iter().copied().filter(|g| g & m == 0).collect()),
        }
    }

    /// Success of `var(t)`: ⊥ if `t` is definitely ground or not a variable.
    pub fn assume_var(&self, t: &Term) -> SharingSub {
        let possibly_free = match t {
            Term::Var(v) => self.occurring().contains(v),
            _ => false,
        };
        if possibly_free {
            self.clone()
        } else {
            SharingSub { vars: self.vars.clone(), groups: None }
        }
    }

    /// Arbitrary bindings among `vars`; ground variables stay ground.
    pub fn top_on(&self, vars: &[String]) -> SharingSub {
        let Some(sh) = &self.groups else {
            return self.clone();
        };
        let m = self.mask_of(vars);
        let rel: BTreeSet<Group> = sh.iter().copied().filter(|g| g & m != 0).collect();
        let mut out: BTreeSet<Group> = sh.iter().copied().filter(|g| g & m == 0).collect();
        out.extend(star(&rel));
        SharingSub { vars: self.vars.clone(), groups: Some(out) }
    }

    /// Restriction to `vars` (which need not all be in scope).
    pub fn project(&self, vars: &[String]) -> SharingSub {
        let keep: Vec<String> = vars.iter().filter(|v| self.vars.contains(v)).cloned().collect();
        let target = sorted_scope(&keep).expect("subset of a valid scope");
        let remap: Vec<Option<usize>> = self.vars.iter().map(|v| target.iter().position(|x| x == v)).collect();
        let groups = self.groups.as_ref().map(|sh| {
            sh.iter()
                .map(|&g| {
                    remap.iter().enumerate().fold(0u64, |m, (i, to)| match to {
                        Some(j) if g & (1 << i) != 0 => m | (1 << j),
                        _ => m,
                    })
                })
                .filter(|&g| g != 0)
                .collect()
        });
        SharingSub { vars: target, groups }
    }

    /// Independent combination with a substitution over disjoint variables.
    pub fn conjoin(&self, other: &SharingSub) -> Result<SharingSub, DomainError> {
        let mut vars = self.vars.clone();
        vars.extend(other.vars.iter().cloned());
        let scope = sorted_scope(&vars)?;
        if scope.len() != self.vars.len() + other.vars.len() {
            return Err(DomainError::Invalid("conjoined scopes overlap".into()));
        }
        let lift = |s: &SharingSub, g: Group| -> Group {
            s.vars.iter().enumerate().fold(0, |m, (i, v)| {
                if g & (1 << i) != 0 {
                    m | (1 << scope.iter().position(|x| x == v).expect("in scope"))
                } else {
                    m
                }
            })
        };
        let groups = match (&self.groups, &other.groups) {
            (Some(a), Some(b)) => {
                Some(a.iter().map(|&g| lift(self, g)).chain(b.iter().map(|&g| lift(other, g))).collect())
            }
            _ => None,
        };
        Ok(SharingSub { vars: scope, groups })
    }

    pub fn widen(&self, params: ShWidenParams) -> SharingSub {
        match &self.groups {
            Some(sh) if sh.len() > params.threshold => {
                let occ = sh.iter().fold(0u64, |m, g| m | g);
                let bits: Vec<u64> = (0..64).filter(|i| occ & (1 << i) != 0).map(|i| 1u64 << i).collect();
                let all = star(&bits.into_iter().collect());
                SharingSub { vars: self.vars.clone(), groups: Some(all) }
            }
            _ => self.clone(),
        }
    }

    /// A variable in no group is ground; everything else is unknown.
    pub fn to_gr(&self) -> GroundSub {
        if self.is_bottom() {
            return GroundSub::Bottom;
        }
        let occ = self.occurring();
        GroundSub::Map(
            self.vars
                .iter()
                .map(|v| (v.clone(), if occ.contains(v) { GroundVal::Any } else { GroundVal::G }))
                .collect(),
        )
    }

    /// Union of the `Occ` groups of each substitution.
    pub fn abstract_concrete(thetas: &[ConcreteSub], vars: &[String]) -> Result<SharingSub, DomainError> {
        let mut out = SharingSub::bottom(vars)?;
        for theta in thetas {
            let images: Vec<Vec<String>> =
                out.vars.iter().map(|v| theta.get(v).map(Term::vars).unwrap_or_else(|| vec![v.clone()])).collect();
            let mut groups = BTreeSet::new();
            for u in images.iter().flatten() {
                let g = images.iter().enumerate().filter(|(_, img)| img.contains(u)).fold(0, |m, (i, _)| m | (1 << i));
                groups.insert(g);
            }
            let one = SharingSub { vars: out.vars.clone(), groups: Some(groups) };
            out = out.try_join(&one)?;
        }
        Ok(out)
    }

    /// All elements over `vars` (⊥ first); intended for `|vars| ≤ 3`.
    pub fn enumerate(vars: &[String]) -> Result<Vec<SharingSub>, DomainError> {
        let top = SharingSub::top(vars)?;
        let all: Vec<Group> = top.groups.clone().expect("top").into_iter().collect();
        if all.len() > 16 {
            return Err(DomainError::TooManyVars(top.vars.len()));
        }
        let mut out = vec![SharingSub::bottom(vars)?];
        for pick in 0u32..(1 << all.len()) {
            let groups = all.iter().enumerate().filter(|(i, _)| pick & (1 << i) != 0).map(|(_, g)| *g).collect();
            out.push(SharingSub { vars: top.vars.clone(), groups: Some(groups) });
        }
        Ok(out)
    }
}

/// `(size(a ⊔ b) − size(a ⊓ b)) / 2ⁿ`.
pub fn sh_distance(a: &SharingSub, b: &SharingSub) -> Result<f64, DomainError> {
    let up = a.try_join(b)?.size();
    let down = a.try_meet(b)?.size();
    Ok((up - down) as f64 / 2f64.powi(a.vars.len() as i32))
}

impl Lattice for SharingSub {
    fn leq(&self, other: &Self) -> bool {
        self.try_leq(other).expect("sharing scopes must match")
    }

    fn join(&self, other: &Self) -> Self {
        self.try_join(other).expect("sharing scopes must match")
    }

    fn meet(&self, other: &Self) -> Self {
        self.try_meet(other).expect("sharing scopes must match")
    }
}

impl fmt::Display for SharingSub {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.groups() {
            None => f.write_str("bot"),
            Some(gs) => {
                f.write_str("[")?;
                for (i, g) in gs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "[{}]", g.join(","))?;
                }
                f.write_str("]")
            }
        }
    }
}
