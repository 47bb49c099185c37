//! Domain operations used by the fixpoint engine.
//!
//! Call and success patterns are substitutions over positional variables
//! `$1 … $n`, one per argument of the called literal.

use std::collections::BTreeMap;

use crate::domain::groundness::{GroundSub, GroundVal};
use crate::domain::sharing::{ShWidenParams, SharingSub};
use crate::domain::{AbstractSub, DomainError};
use crate::program::TrustDecl;
use crate::term::Term;

pub fn positional(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("${i}")).collect()
}

fn pos_terms(n: usize) -> Vec<Term> {
    positional(n).into_iter().map(Term::Var).collect()
}

pub fn bottom_like(sub: &AbstractSub, vars: &[String]) -> Result<AbstractSub, DomainError> {
    Ok(match sub {
        AbstractSub::Gr(_) => AbstractSub::Gr(GroundSub::Bottom),
        AbstractSub::Share(_) => AbstractSub::Share(SharingSub::bottom(vars)?),
    })
}

pub fn project(sub: &AbstractSub, vars: &[String]) -> AbstractSub {
    match sub {
        AbstractSub::Gr(g) => AbstractSub::Gr(g.project(vars)),
        AbstractSub::Share(s) => AbstractSub::Share(s.project(vars)),
    }
}

pub fn unify(sub: &AbstractSub, s: &Term, t: &Term) -> AbstractSub {
    match sub {
        AbstractSub::Gr(g) => AbstractSub::Gr(g.unify(s, t)),
        AbstractSub::Share(sh) => AbstractSub::Share(sh.unify(s, t)),
    }
}

pub fn assume_ground(sub: &AbstractSub, t: &Term) -> AbstractSub {
    match sub {
        AbstractSub::Gr(g) => AbstractSub::Gr(g.assume_ground(t)),
        AbstractSub::Share(s) => AbstractSub::Share(s.assume_ground(t)),
    }
}

pub fn assume_var(sub: &AbstractSub, t: &Term) -> AbstractSub {
    match sub {
        AbstractSub::Gr(g) => AbstractSub::Gr(g.assume_var(t)),
        AbstractSub::Share(s) => AbstractSub::Share(s.assume_var(t)),
    }
}

pub fn top_on(sub: &AbstractSub, vars: &[String]) -> AbstractSub {
    match sub {
        AbstractSub::Gr(g) => AbstractSub::Gr(g.top_on(vars)),
        AbstractSub::Share(s) => AbstractSub::Share(s.top_on(vars)),
    }
}

pub fn widen(pattern: AbstractSub, params: Option<ShWidenParams>) -> AbstractSub {
    match (pattern, params) {
        (AbstractSub::Share(s), Some(p)) => AbstractSub::Share(s.widen(p)),
        (other, _) => other,
    }
}

/// Abstract call pattern of a literal with arguments `args` under `sub`.
pub fn pattern_of(sub: &AbstractSub, args: &[Term]) -> Result<AbstractSub, DomainError> {
    let pos = positional(args.len());
    match sub {
        AbstractSub::Gr(GroundSub::Bottom) => Ok(AbstractSub::Gr(GroundSub::Bottom)),
        AbstractSub::Gr(g) => {
            Ok(AbstractSub::Gr(GroundSub::Map(pos.into_iter().zip(args).map(|(p, a)| (p, g.term_value(a))).collect())))
        }
        AbstractSub::Share(s) => {
            let mut ext = s.conjoin(&SharingSub::fresh(&pos)?)?;
            for (p, a) in pos.iter().zip(args) {
                ext = ext.amgu(p, a);
            }
            Ok(AbstractSub::Share(ext.project(&pos)))
        }
    }
}

/// Clause entry substitution over `clause_vars` for a call with `pattern`.
pub fn entry_of(pattern: &AbstractSub, head: &Term, clause_vars: &[String]) -> Result<AbstractSub, DomainError> {
    let args = head.args();
    match pattern {
        AbstractSub::Gr(GroundSub::Bottom) => Ok(AbstractSub::Gr(GroundSub::Bottom)),
        AbstractSub::Gr(p) => {
            let vals: Vec<GroundVal> =
                positional(args.len()).iter().map(|v| p.get(v).unwrap_or(GroundVal::Any)).collect();
            // occurrences of each head variable: (argument, exact)
            let mut occ: BTreeMap<String, Vec<(usize, bool)>> = BTreeMap::new();
            for (i, a) in args.iter().enumerate() {
                match a {
                    Term::Var(v) => occ.entry(v.clone()).or_default().push((i, true)),
                    _ => {
                        for v in a.vars() {
                            occ.entry(v).or_default().push((i, false));
                        }
                    }
                }
            }
            let map = clause_vars
                .iter()
                .map(|v| {
                    let val = match occ.get(v) {
                        None => GroundVal::Ng,
                        Some(os) if os.iter().any(|(i, _)| vals[*i] == GroundVal::G) => GroundVal::G,
                        Some(os) if os.len() == 1 && os[0].1 => vals[os[0].0],
                        Some(_) => GroundVal::Any,
                    };
                    (v.clone(), val)
                })
                .collect();
            Ok(AbstractSub::Gr(GroundSub::Map(map)))
        }
        AbstractSub::Share(p) => {
            let mut ext = p.conjoin(&SharingSub::fresh(clause_vars)?)?;
            for (v, a) in positional(args.len()).iter().zip(args) {
                ext = ext.amgu(v, a);
            }
            Ok(AbstractSub::Share(ext.project(clause_vars)))
        }
    }
}

/// Substitution after a call whose arguments `args` succeeded with
/// `success` (a positional pattern).
pub fn apply_success(before: &AbstractSub, args: &[Term], success: &AbstractSub) -> Result<AbstractSub, DomainError> {
    match (before, success) {
        (AbstractSub::Gr(GroundSub::Bottom), _) | (AbstractSub::Gr(_), AbstractSub::Gr(GroundSub::Bottom)) => {
            Ok(AbstractSub::Gr(GroundSub::Bottom))
        }
        (AbstractSub::Gr(GroundSub::Map(b)), AbstractSub::Gr(s)) => {
            let vals: Vec<GroundVal> =
                positional(args.len()).iter().map(|v| s.get(v).unwrap_or(GroundVal::Any)).collect();
            let mut out = b.clone();
            let mut occ: BTreeMap<String, Vec<(usize, bool)>> = BTreeMap::new();
            for (i, a) in args.iter().enumerate() {
                if a.is_ground() && vals[i] == GroundVal::Ng {
                    return Ok(AbstractSub::Gr(GroundSub::Bottom));
                }
                for v in a.vars() {
                    occ.entry(v).or_default().push((i, a.is_var()));
                }
            }
            for (v, os) in occ {
                let was = b.get(&v).copied().unwrap_or(GroundVal::Any);
                let val = if os.iter().any(|(i, _)| vals[*i] == GroundVal::G) {
                    GroundVal::G
                } else if was == GroundVal::G {
                    if os.iter().any(|(i, exact)| *exact && vals[*i] == GroundVal::Ng) {
                        return Ok(AbstractSub::Gr(GroundSub::Bottom));
                    }
                    GroundVal::G
                } else if os.iter().all(|(i, exact)| *exact && vals[*i] == GroundVal::Ng) {
                    GroundVal::Ng
                } else {
                    GroundVal::Any
                };
                out.insert(v, val);
            }
            Ok(AbstractSub::Gr(GroundSub::Map(out)))
        }
        (AbstractSub::Share(b), AbstractSub::Share(s)) => {
            if b.is_bottom() || s.is_bottom() {
                return Ok(AbstractSub::Share(SharingSub::bottom(b.vars())?));
            }
            let mut ext = b.conjoin(s)?;
            for (v, a) in positional(args.len()).iter().zip(args) {
                ext = ext.amgu(v, a);
            }
            Ok(AbstractSub::Share(ext.project(b.vars())))
        }
        _ => Err(DomainError::DomainMismatch(before.kind().name(), success.kind().name())),
    }
}

/// Success pattern for a call to a predicate with no usable information:
/// arguments known to be ground stay ground.
pub fn top_pattern(pattern: &AbstractSub) -> AbstractSub {
    let vars = match pattern {
        AbstractSub::Gr(g) => g.vars(),
        AbstractSub::Share(s) => s.vars().to_vec(),
    };
    top_on(pattern, &vars)
}

/// Success pattern granted by a trust declaration, or `None` when the
/// call pattern does not satisfy its precondition.
pub fn trust_success(pattern: &AbstractSub, trust: &TrustDecl) -> Result<Option<AbstractSub>, DomainError> {
    if pattern.is_bottom() {
        return Ok(Some(pattern.clone()));
    }
    let head_args = trust.head.args();
    let pos = pos_terms(head_args.len());
    let mut rename = BTreeMap::new();
    for (a, p) in head_args.iter().zip(&pos) {
        match a {
            Term::Var(v) if !rename.contains_key(v) => {
                rename.insert(v.clone(), p.as_var().expect("positional").to_string());
            }
            _ => {
                return Err(DomainError::Invalid(format!(
                    "trust head {} must have distinct variable arguments",
                    trust.head
                )))
            }
        }
    }
    let prop = |t: &Term| -> Result<(String, Term), DomainError> {
        match t {
            Term::Compound(n, args) if args.len() == 1 && (n == "ground" || n == "var") => {
                Ok((n.clone(), args[0].rename(&rename)))
            }
            _ => Err(DomainError::Invalid(format!("unsupported trust property {t}"))),
        }
    };
    for p in &trust.pre {
        let (kind, arg) = prop(p)?;
        let holds = match (pattern, kind.as_str()) {
            (AbstractSub::Gr(g), "ground") => g.term_value(&arg) == GroundVal::G,
            (AbstractSub::Gr(g), _) => g.term_value(&arg) == GroundVal::Ng,
            (AbstractSub::Share(s), "ground") => arg.vars().iter().all(|v| !s.occurring().contains(v)),
            (AbstractSub::Share(s), _) => arg.as_var().is_some_and(|v| s.occurring().iter().any(|o| o == v)),
        };
        if !holds {
            return Ok(None);
        }
    }
    let mut out = top_pattern(pattern);
    for p in &trust.post {
        let (kind, arg) = prop(p)?;
        out = if kind == "ground" { assume_ground(&out, &arg) } else { assume_var(&out, &arg) };
    }
    Ok(Some(out))
}
