//! Parsed logic programs, program points and entry declarations.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::domain::groundness::{GroundSub, GroundVal};
use crate::domain::sharing::SharingSub;
use crate::domain::{AbstractSub, DomainError, DomainKind};
use crate::term::{write_atom, Term};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PredKey {
    pub name: String,
    pub arity: usize,
}

impl PredKey {
    pub fn new(name: impl Into<String>, arity: usize) -> Self {
        PredKey { name: name.into(), arity }
    }

    pub fn of(t: &Term) -> Option<PredKey> {
        t.functor().map(|(n, a)| PredKey::new(n, a))
    }
}

impl fmt::Display for PredKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.name, self.arity)
    }
}

impl FromStr for PredKey {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (name, arity) = s.rsplit_once('/').ok_or_else(|| format!("expected name/arity, got `{s}`"))?;
        let arity = arity.parse().map_err(|_| format!("bad arity in `{s}`"))?;
        if name.is_empty() {
            return Err(format!("empty predicate name in `{s}`"));
        }
        Ok(PredKey::new(name, arity))
    }
}

/// `pred/arity/clause/literal`, or `pred/arity/0` for an analysis root.
/// Clauses and literals are numbered from 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProgramPoint {
    pub pred: PredKey,
    pub site: Option<(usize, usize)>,
}

impl ProgramPoint {
    pub fn entry(pred: PredKey) -> Self {
        ProgramPoint { pred, site: None }
    }

    pub fn literal(pred: PredKey, clause: usize, lit: usize) -> Self {
        ProgramPoint { pred, site: Some((clause, lit)) }
    }
}

impl fmt::Display for ProgramPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.site {
            None => write!(f, "{}/0", self.pred),
            Some((c, l)) => write!(f, "{}/{c}/{l}", self.pred),
        }
    }
}

impl FromStr for ProgramPoint {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.rsplitn(3, '/').collect();
        // entry form: name/arity/0
        if parts.len() == 3 && parts[0] == "0" {
            if let Ok(pred) = format!("{}/{}", parts[2], parts[1]).parse() {
                return Ok(ProgramPoint::entry(pred));
            }
        }
        let parts: Vec<&str> = s.rsplitn(4, '/').collect();
        if parts.len() != 4 {
            return Err(format!("bad program point `{s}`"));
        }
        let num = |x: &str| x.parse::<usize>().map_err(|_| format!("bad program point `{s}`"));
        let pred = format!("{}/{}", parts[3], parts[2]).parse()?;
        Ok(ProgramPoint::literal(pred, num(parts[1])?, num(parts[0])?))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Clause {
    pub head: Term,
    pub body: Vec<Term>,
    pub line: usize,
}

impl Clause {
    /// Variables in order of first occurrence (head first).
    pub fn vars(&self) -> Vec<String> {
        let mut out = self.head.vars();
        for l in &self.body {
            l.collect_vars(&mut out);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Predicate {
    pub key: PredKey,
    pub clauses: Vec<Clause>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntryDecl {
    pub head: Term,
    pub props: Vec<Term>,
}

impl EntryDecl {
    pub fn pred(&self) -> PredKey {
        PredKey::of(&self.head).expect("entry heads are callable")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrustDecl {
    pub head: Term,
    pub pre: Vec<Term>,
    pub post: Vec<Term>,
}

impl TrustDecl {
    pub fn pred(&self) -> PredKey {
        PredKey::of(&self.head).expect("trust heads are callable")
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Program {
    pub predicates: Vec<Predicate>,
    pub entries: Vec<EntryDecl>,
    pub trusts: Vec<TrustDecl>,
    pub imports: Vec<PredKey>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EntryError {
    #[error("unknown property `{0}` (expected ground/1 or var/1 on a head variable)")]
    UnknownProperty(String),
    #[error("entry head arguments must be distinct variables: {0}")]
    BadHead(String),
    #[error(transparent)]
    Domain(#[from] DomainError),
}

impl Program {
    pub fn predicate(&self, key: &PredKey) -> Option<&Predicate> {
        self.predicates.iter().find(|p| &p.key == key)
    }

    pub fn trust(&self, key: &PredKey) -> Option<&TrustDecl> {
        self.trusts.iter().find(|t| &t.pred() == key)
    }

    pub fn is_imported(&self, key: &PredKey) -> bool {
        self.imports.contains(key)
    }

    /// The entry for `pred`, or the only entry when `pred` is `None`.
    pub fn entry(&self, pred: Option<&PredKey>) -> Option<&EntryDecl> {
        match pred {
            Some(k) => self.entries.iter().find(|e| &e.pred() == k),
            None => self.entries.first(),
        }
    }

    /// Entry pseudo-points first, then every body literal in predicate,
    /// clause and literal order.
    pub fn program_points(&self) -> Vec<ProgramPoint> {
        let mut out: Vec<ProgramPoint> = self.entries.iter().map(|e| ProgramPoint::entry(e.pred())).collect();
        for p in &self.predicates {
            for (ci, c) in p.clauses.iter().enumerate() {
                for li in 0..c.body.len() {
                    out.push(ProgramPoint::literal(p.key.clone(), ci + 1, li + 1));
                }
            }
        }
        out
    }
}

/// Reads `ground(X)` / `var(X)` properties into a per-variable table.
fn read_props(vars: &[String], props: &[Term]) -> Result<Vec<Option<GroundVal>>, EntryError> {
    let mut table = vec![None; vars.len()];
    for p in props {
        let (val, arg) = match p {
            Term::Compound(n, args) if args.len() == 1 && n == "ground" => (GroundVal::G, &args[0]),
            Term::Compound(n, args) if args.len() == 1 && n == "var" => (GroundVal::Ng, &args[0]),
            _ => return Err(EntryError::UnknownProperty(p.to_string())),
        };
        let i = arg
            .as_var()
            .and_then(|v| vars.iter().position(|x| x == v))
            .ok_or_else(|| EntryError::UnknownProperty(p.to_string()))?;
        table[i] = Some(val);
    }
    Ok(table)
}

fn head_vars(head: &Term) -> Result<Vec<String>, EntryError> {
    let vars: Vec<String> = head.args().iter().filter_map(|a| a.as_var().map(str::to_string)).collect();
    let distinct: BTreeSet<&String> = vars.iter().collect();
    if vars.len() != head.args().len() || distinct.len() != vars.len() {
        return Err(EntryError::BadHead(head.to_string()));
    }
    Ok(vars)
}

/// Initial call substitution over the entry head's variables.
pub fn entry_to_abstract(decl: &EntryDecl, domain: DomainKind) -> Result<AbstractSub, EntryError> {
    let vars = head_vars(&decl.head)?;
    let table = read_props(&vars, &decl.props)?;
    Ok(match domain {
        DomainKind::Gr => AbstractSub::Gr(GroundSub::Map(
            vars.iter().zip(&table).map(|(v, t)| (v.clone(), t.unwrap_or(GroundVal::Any))).collect(),
        )),
        DomainKind::Share => {
            let free: Vec<&String> =
                vars.iter().zip(&table).filter(|(_, t)| **t == Some(GroundVal::Ng)).map(|(v, _)| v).collect();
            let open: Vec<&String> = vars.iter().zip(&table).filter(|(_, t)| t.is_none()).map(|(v, _)| v).collect();
            let mut groups: Vec<Vec<String>> = free.iter().map(|v| vec![(*v).clone()]).collect();
            let pool: Vec<&String> = open.iter().chain(&free).copied().collect();
            for mask in 1u64..(1 << pool.len()) {
                let members: Vec<String> =
                    (0..pool.len()).filter(|i| mask & (1 << i) != 0).map(|i| pool[i].clone()).collect();
                if members.iter().any(|m| open.contains(&m)) {
                    groups.push(members);
                }
            }
            AbstractSub::Share(SharingSub::new(&vars, &groups)?)
        }
    })
}

fn write_conj(f: &mut fmt::Formatter<'_>, goals: &[Term]) -> fmt::Result {
    for (i, g) in goals.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{g}")?;
    }
    Ok(())
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.imports.is_empty() {
            f.write_str(":- use_module(imports, [")?;
            for (i, k) in self.imports.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write_atom(f, &k.name)?;
                write!(f, "/{}", k.arity)?;
            }
            f.write_str("]).\n")?;
        }
        for e in &self.entries {
            write!(f, ":- entry {}", e.head)?;
            if !e.props.is_empty() {
                f.write_str(" : (")?;
                write_conj(f, &e.props)?;
                f.write_str(")")?;
            }
            f.write_str(".\n")?;
        }
        for t in &self.trusts {
            write!(f, ":- trust success {} : (", t.head)?;
            write_conj(f, &t.pre)?;
            f.write_str(") => (")?;
            write_conj(f, &t.post)?;
            f.write_str(").\n")?;
        }
        for p in &self.predicates {
            for c in &p.clauses {
                write!(f, "{}", c.head)?;
                if !c.body.is_empty() {
                    f.write_str(" :- ")?;
                    write_conj(f, &c.body)?;
                }
                f.write_str(".\n")?;
            }
        }
        Ok(())
    }
}
