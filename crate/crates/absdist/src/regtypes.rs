//! Deterministic regular term grammars and the distance between them.
//!
//! Grammar files hold one nonterminal per line:
//!
//! ```text
//! L ::= nil | cons(A, L)
//! A ::= a | b
//! tuple X:L, Y:A
//! ```
//!
//! Nonterminals start with an uppercase letter or `_`. Each alternative is a
//! constant or a functor applied to nonterminals.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::lattice::product_distance;
use crate::term::{write_atom, Term};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RegTypeError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("nonterminal {0} is referenced but not defined")]
    Undefined(String),
    #[error("nonterminal {0} is defined twice")]
    Redefined(String),
    #[error("nonterminal {nt} has two productions for {functor}")]
    NonDeterministic { nt: String, functor: String },
    #[error("nonterminal {0} generates no finite term")]
    EmptyLanguage(String),
    #[error("contraction factor must lie in (0, 1), got {0}")]
    BadFactor(f64),
    #[error("type tuples have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("cannot build a grammar for an empty term set")]
    EmptySet,
    #[error("term {0} is not ground")]
    NonGround(String),
    #[error("term set has no exact deterministic grammar: {0}")]
    NotRepresentable(String),
}

/// Functor name and arity.
pub type Functor = (String, usize);

/// Productions per nonterminal: functor to argument nonterminals.
pub type Rules = BTreeMap<String, BTreeMap<Functor, Vec<String>>>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeGrammar {
    start: String,
    rules: Rules,
}

impl TypeGrammar {
    /// Checks that every referenced nonterminal is defined and generates at
    /// least one finite term, then keeps only the part reachable from `start`.
    pub fn new(start: impl Into<String>, rules: Rules) -> Result<Self, RegTypeError> {
        let start = start.into();
        if !rules.contains_key(&start) {
            return Err(RegTypeError::Undefined(start));
        }
        let mut reach = BTreeSet::from([start.clone()]);
        let mut stack = vec![start.clone()];
        while let Some(nt) = stack.pop() {
            let prods = rules.get(&nt).ok_or_else(|| RegTypeError::Undefined(nt.clone()))?;
            for arg in prods.values().flatten() {
                if reach.insert(arg.clone()) {
                    stack.push(arg.clone());
                }
            }
        }
        let rules: Rules = rules.into_iter().filter(|(k, _)| reach.contains(k)).collect();
        let mut productive: BTreeSet<&String> = BTreeSet::new();
        loop {
            let before = productive.len();
            for (nt, prods) in &rules {
                if prods.values().any(|args| args.iter().all(|a| productive.contains(a))) {
                    productive.insert(nt);
                }
            }
            if productive.len() == before {
                break;
            }
        }
        if let Some(nt) = rules.keys().find(|k| !productive.contains(k)) {
            return Err(RegTypeError::EmptyLanguage(nt.clone()));
        }
        Ok(TypeGrammar { start, rules })
    }

    pub fn start(&self) -> &str {
        &self.start
    }

    pub fn rules(&self) -> &Rules {
        &self.rules
    }

    pub fn productions(&self, nt: &str) -> &BTreeMap<Functor, Vec<String>> {
        &self.rules[nt]
    }

    /// Same rules, different start symbol.
    pub fn with_start(&self, start: &str) -> Result<TypeGrammar, RegTypeError> {
        TypeGrammar::new(start, self.rules.clone())
    }

    /// Longest derivation from `nt`, or `None` if a cycle is reachable.
    fn max_depth(&self, nt: &str, on_path: &mut BTreeSet<String>, memo: &mut BTreeMap<String, usize>) -> Option<usize> {
        if let Some(&d) = memo.get(nt) {
            return Some(d);
        }
        if !on_path.insert(nt.to_string()) {
            return None;
        }
        let mut best = 1;
        for args in self.rules[nt].values() {
            for a in args {
                best = best.max(1 + self.max_depth(a, on_path, memo)?);
            }
        }
        on_path.remove(nt);
        memo.insert(nt.to_string(), best);
        Some(best)
    }
}

impl fmt::Display for TypeGrammar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let order = std::iter::once(&self.start).chain(self.rules.keys().filter(|k| **k != self.start));
        for nt in order {
            write!(f, "{nt} ::= ")?;
            for (i, ((name, _), args)) in self.rules[nt].iter().enumerate() {
                if i > 0 {
                    f.write_str(" | ")?;
                }
                write_atom(f, name)?;
                if !args.is_empty() {
                    write!(f, "({})", args.join(", "))?;
                }
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// One grammar per substitution variable.
#[derive(Debug, Clone, PartialEq)]
pub struct RegTuple {
    pub vars: Vec<String>,
    pub types: Vec<TypeGrammar>,
}

/// Contents of a grammar file.
#[derive(Debug, Clone, PartialEq)]
pub struct GrammarFile {
    pub rules: Rules,
    pub tuples: Vec<Vec<(String, String)>>,
}

impl GrammarFile {
    pub fn grammar(&self, start: &str) -> Result<TypeGrammar, RegTypeError> {
        TypeGrammar::new(start, self.rules.clone())
    }

    pub fn tuple(&self, index: usize) -> Result<RegTuple, RegTypeError> {
        let row =
            self.tuples.get(index).ok_or_else(|| RegTypeError::Parse { line: 0, msg: format!("no tuple #{index}") })?;
        Ok(RegTuple {
            vars: row.iter().map(|(v, _)| v.clone()).collect(),
            types: row.iter().map(|(_, nt)| self.grammar(nt)).collect::<Result<_, _>>()?,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Name(String),
    Quoted(String),
    Sym(&'static str),
}

fn tokenize(line: &str, lineno: usize) -> Result<Vec<Tok>, RegTypeError> {
    let err = |msg: String| RegTypeError::Parse { line: lineno, msg };
    let mut out = Vec::new();
    let mut chars = line.char_indices().peekable();
    while let Some(&(i, c)) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
        } else if c == '%' {
            break;
        } else if line[i..].starts_with("::=") {
            out.push(Tok::Sym("::="));
            for _ in 0..3 {
                chars.next();
            }
        } else if line[i..].starts_with("[]") {
            out.push(Tok::Quoted("[]".into()));
            chars.next();
            chars.next();
        } else if c.is_ascii_alphanumeric() || c == '_' {
            let mut s = String::new();
            while let Some(&(_, c)) = chars.peek() {
                if c.is_ascii_alphanumeric() || c == '_' {
                    s.push(c);
                    chars.next();
                } else {
                    break;
                }
            }
            out.push(Tok::Name(s));
        } else if c == '\'' {
            chars.next();
            let mut s = String::new();
            loop {
                match chars.next() {
                    Some((_, '\'')) => break,
                    Some((_, '\\')) => match chars.next() {
                        Some((_, 'n')) => s.push('\n'),
                        Some((_, c)) => s.push(c),
                        None => return Err(err("unterminated quoted atom".into())),
                    },
                    Some((_, c)) => s.push(c),
                    None => return Err(err("unterminated quoted atom".into())),
                }
            }
            out.push(Tok::Quoted(s));
        } else {
            let sym = match c {
                '|' => "|",
                '(' => "(",
                ')' => ")",
                ',' => ",",
                ':' => ":",
                _ => return Err(err(format!("unexpected character `{c}`"))),
            };
            out.push(Tok::Sym(sym));
            chars.next();
        }
    }
    Ok(out)
}

fn is_nonterminal(name: &str) -> bool {
    name.starts_with(|c: char| c.is_ascii_uppercase() || c == '_')
}

/// Parses a grammar file.
pub fn parse_grammars(text: &str) -> Result<GrammarFile, RegTypeError> {
    let mut rules = Rules::new();
    let mut tuples = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let err = |msg: &str| RegTypeError::Parse { line: lineno, msg: msg.to_string() };
        let toks = tokenize(line, lineno)?;
        let mut it = toks.into_iter().peekable();
        match it.next() {
            None => continue,
            Some(Tok::Name(t)) if t == "tuple" => {
                let mut row = Vec::new();
                loop {
                    let var = match it.next() {
                        Some(Tok::Name(v)) => v,
                        _ => return Err(err("expected a variable name")),
                    };
                    if it.next() != Some(Tok::Sym(":")) {
                        return Err(err("expected `:`"));
                    }
                    let nt = match it.next() {
                        Some(Tok::Name(n)) if is_nonterminal(&n) => n,
                        _ => return Err(err("expected a nonterminal")),
                    };
                    row.push((var, nt));
                    match it.next() {
                        None => break,
                        Some(Tok::Sym(",")) => {}
                        _ => return Err(err("expected `,` between tuple components")),
                    }
                }
                tuples.push(row);
            }
            Some(Tok::Name(nt)) if is_nonterminal(&nt) => {
                if it.next() != Some(Tok::Sym("::=")) {
                    return Err(err("expected `::=`"));
                }
                let mut prods = BTreeMap::new();
                loop {
                    let name = match it.next() {
                        Some(Tok::Name(n)) if !is_nonterminal(&n) => n,
                        Some(Tok::Quoted(n)) => n,
                        _ => return Err(err("expected a functor or constant")),
                    };
                    let mut args = Vec::new();
                    if it.peek() == Some(&Tok::Sym("(")) {
                        it.next();
                        loop {
                            match it.next() {
                                Some(Tok::Name(a)) if is_nonterminal(&a) => args.push(a),
                                _ => return Err(err("functor arguments must be nonterminals")),
                            }
                            match it.next() {
                                Some(Tok::Sym(",")) => {}
                                Some(Tok::Sym(")")) => break,
                                _ => return Err(err("expected `,` or `)`")),
                            }
                        }
                    }
                    let (key_name, arity) = (name.clone(), args.len());
                    if prods.insert((name, arity), args).is_some() {
                        return Err(RegTypeError::NonDeterministic {
                            nt: nt.clone(),
                            functor: format!("{}/{}", key_name, arity),
                        });
                    }
                    match it.next() {
                        None => break,
                        Some(Tok::Sym("|")) => {}
                        _ => return Err(err("expected `|` between alternatives")),
                    }
                }
                if rules.insert(nt.clone(), prods).is_some() {
                    return Err(RegTypeError::Redefined(nt));
                }
            }
            _ => return Err(err("expected `Nonterminal ::= ...` or `tuple ...`")),
        }
    }
    Ok(GrammarFile { rules, tuples })
}

fn check_factor(p: f64) -> Result<(), RegTypeError> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(RegTypeError::BadFactor(p))
    }
}

/// Distance between two grammars: 1 when the root functor sets differ,
/// otherwise the largest `p/n · Σ d′(argᵢ, argᵢ′)` over shared functors.
/// Computed as the least fixpoint over the reachable nonterminal pairs.
pub fn dprime(g1: &TypeGrammar, g2: &TypeGrammar, p: f64, tol: f64) -> Result<f64, RegTypeError> {
    check_factor(p)?;
    let root = (g1.start.clone(), g2.start.clone());
    let mut index: BTreeMap<(String, String), usize> = BTreeMap::from([(root.clone(), 0)]);
    let mut pairs = vec![root];
    // per pair: None when functor sets differ, else per-functor child pair ids
    let mut eqs: Vec<Option<Vec<Vec<usize>>>> = Vec::new();
    let mut next = 0;
    while next < pairs.len() {
        let (a, b) = pairs[next].clone();
        let (pa, pb) = (g1.productions(&a), g2.productions(&b));
        if !pa.keys().eq(pb.keys()) {
            eqs.push(None);
        } else {
            let mut per = Vec::new();
            for (f, args_a) in pa {
                let mut ids = Vec::new();
                for (x, y) in args_a.iter().zip(&pb[f]) {
                    let key = (x.clone(), y.clone());
                    let id = *index.entry(key.clone()).or_insert_with(|| {
                        pairs.push(key);
                        pairs.len() - 1
                    });
                    ids.push(id);
                }
                per.push(ids);
            }
            eqs.push(Some(per));
        }
        next += 1;
    }
    let cap = ((tol.ln() / p.ln()).ceil().max(0.0) as usize) + 64;
    let mut x = vec![0.0; pairs.len()];
    for _ in 0..cap {
        let mut change: f64 = 0.0;
        let new: Vec<f64> = eqs
            .iter()
            .map(|eq| match eq {
                None => 1.0,
                Some(per) => per
                    .iter()
                    .map(|ids| {
                        if ids.is_empty() {
                            0.0
                        } else {
                            p * ids.iter().map(|&i| x[i]).sum::<f64>() / ids.len() as f64
                        }
                    })
                    .fold(0.0, f64::max),
            })
            .collect();
        for (o, n) in x.iter().zip(&new) {
            change = change.max((o - n).abs());
        }
        x = new;
        if change < tol {
            break;
        }
    }
    Ok(x[0])
}

/// 2-norm of the component distances; divided by `sqrt(n)` if `normalize`.
pub fn regtuple_distance(t1: &RegTuple, t2: &RegTuple, p: f64, tol: f64, normalize: bool) -> Result<f64, RegTypeError> {
    if t1.types.len() != t2.types.len() {
        return Err(RegTypeError::LengthMismatch(t1.types.len(), t2.types.len()));
    }
    let ds = t1.types.iter().zip(&t2.types).map(|(a, b)| dprime(a, b, p, tol)).collect::<Result<Vec<_>, _>>()?;
    Ok(product_distance(&ds, normalize))
}

/// Terms of depth at most `depth_cap` generated from the start symbol, and
/// whether that is the whole language.
pub fn finite_language(g: &TypeGrammar, depth_cap: usize) -> (BTreeSet<Term>, bool) {
    let mut lang: BTreeMap<&String, BTreeSet<Term>> = g.rules.keys().map(|k| (k, BTreeSet::new())).collect();
    for _ in 0..depth_cap {
        let mut next = BTreeMap::new();
        for (nt, prods) in &g.rules {
            let mut terms = BTreeSet::new();
            for ((name, _), args) in prods {
                let mut partial: Vec<Vec<Term>> = vec![Vec::new()];
                for a in args {
                    partial = partial
                        .into_iter()
                        .flat_map(|pre| {
                            lang[a].iter().map(move |t| {
                                let mut v = pre.clone();
                                v.push(t.clone());
                                v
                            })
                        })
                        .collect();
                }
                terms.extend(partial.into_iter().map(|xs| Term::compound(name.clone(), xs)));
            }
            next.insert(nt, terms);
        }
        lang = next;
    }
    let exhausted = g.max_depth(&g.start, &mut BTreeSet::new(), &mut BTreeMap::new()).is_some_and(|d| d <= depth_cap);
    (lang.remove(&g.start).unwrap_or_default(), exhausted)
}

/// Grammar whose language is exactly `ts`. Fails when no deterministic
/// grammar describes the set, e.g. `{f(a,b), f(b,a)}`.
pub fn grammar_of_terms(ts: &BTreeSet<Term>) -> Result<TypeGrammar, RegTypeError> {
    if ts.is_empty() {
        return Err(RegTypeError::EmptySet);
    }
    if let Some(t) = ts.iter().find(|t| !t.is_ground()) {
        return Err(RegTypeError::NonGround(t.to_string()));
    }
    fn build(set: &BTreeSet<Term>, names: &mut BTreeMap<BTreeSet<Term>, String>, rules: &mut Rules) -> String {
        if let Some(n) = names.get(set) {
            return n.clone();
        }
        let name = if names.is_empty() { "S".to_string() } else { format!("T{}", names.len()) };
        names.insert(set.clone(), name.clone());
        let mut by_functor: BTreeMap<Functor, Vec<&Term>> = BTreeMap::new();
        for t in set {
            let (f, n) = t.functor().expect("ground");
            by_functor.entry((f.to_string(), n)).or_default().push(t);
        }
        let mut prods = BTreeMap::new();
        for (f, terms) in by_functor {
            let args = (0..f.1)
                .map(|i| {
                    let column: BTreeSet<Term> = terms.iter().map(|t| t.args()[i].clone()).collect();
                    build(&column, names, rules)
                })
                .collect();
            prods.insert(f, args);
        }
        rules.insert(name.clone(), prods);
        name
    }
    let mut rules = Rules::new();
    let start = build(ts, &mut BTreeMap::new(), &mut rules);
    let g = TypeGrammar::new(start, rules)?;
    let depth = ts.iter().map(Term::depth).max().unwrap_or(1);
    let (lang, _) = finite_language(&g, depth);
    if &lang != ts {
        let extra = lang.difference(ts).next().map(|t| t.to_string()).unwrap_or_default();
        return Err(RegTypeError::NotRepresentable(format!("the closest grammar also generates {extra}")));
    }
    Ok(g)
}
