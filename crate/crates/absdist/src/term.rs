//! First-order terms.

use std::collections::BTreeMap;
use std::fmt;

/// A finite first-order term. Lists use the `'.'/2` functor and the `[]`
/// constant; numbers are constants whose name is their decimal spelling.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    Atom(String),
    /// Functor name and arguments; never empty.
    Compound(String, Vec<Term>),
}

pub const NIL: &str = "[]";
pub const CONS: &str = ".";

impl Term {
    pub fn var(name: impl Into<String>) -> Term {
        Term::Var(name.into())
    }

    pub fn atom(name: impl Into<String>) -> Term {
        Term::Atom(name.into())
    }

    /// Builds `f(args..)`; an empty argument list gives the constant `f`.
    pub fn compound(name: impl Into<String>, args: Vec<Term>) -> Term {
        let name = name.into();
        if args.is_empty() {
            Term::Atom(name)
        } else {
            Term::Compound(name, args)
        }
    }

    pub fn nil() -> Term {
        Term::Atom(NIL.into())
    }

    pub fn cons(head: Term, tail: Term) -> Term {
        Term::Compound(CONS.into(), vec![head, tail])
    }

    /// `[a, b, ... | tail]`
    pub fn list(items: impl IntoIterator<Item = Term, IntoIter: DoubleEndedIterator>, tail: Term) -> Term {
        items.into_iter().rev().fold(tail, |acc, t| Term::cons(t, acc))
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn as_var(&self) -> Option<&str> {
        match self {
            Term::Var(v) => Some(v),
            _ => None,
        }
    }

    /// Principal functor name and arity; `None` for variables.
    pub fn functor(&self) -> Option<(&str, usize)> {
        match self {
            Term::Var(_) => None,
            Term::Atom(a) => Some((a, 0)),
            Term::Compound(f, args) => Some((f, args.len())),
        }
    }

    pub fn args(&self) -> &[Term] {
        match self {
            Term::Compound(_, args) => args,
            _ => &[],
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::Atom(_) => true,
            Term::Compound(_, args) => args.iter().all(Term::is_ground),
        }
    }

    /// Distinct variables in order of first occurrence.
    pub fn vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    /// Appends variables not already in `out`, in order of first occurrence.
    pub fn collect_vars(&self, out: &mut Vec<String>) {
        match self {
            Term::Var(v) => {
                if !out.iter().any(|x| x == v) {
                    out.push(v.clone());
                }
            }
            Term::Atom(_) => {}
            Term::Compound(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    pub fn contains_var(&self, name: &str) -> bool {
        match self {
            Term::Var(v) => v == name,
            Term::Atom(_) => false,
            Term::Compound(_, args) => args.iter().any(|a| a.contains_var(name)),
        }
    }

    /// Replaces variables according to `map`; unmapped variables are kept.
    pub fn rename(&self, map: &BTreeMap<String, String>) -> Term {
        match self {
            Term::Var(v) => Term::Var(map.get(v).cloned().unwrap_or_else(|| v.clone())),
            Term::Atom(_) => self.clone(),
            Term::Compound(f, args) => Term::Compound(f.clone(), args.iter().map(|a| a.rename(map)).collect()),
        }
    }

    /// Applies a substitution, resolving bindings transitively. A variable
    /// bound to itself counts as unbound.
    pub fn substitute(&self, s: &BTreeMap<String, Term>) -> Term {
        match self {
            Term::Var(v) => match s.get(v) {
                Some(Term::Var(w)) if w == v => self.clone(),
                Some(t) => t.substitute(s),
                None => self.clone(),
            },
            Term::Atom(_) => self.clone(),
            Term::Compound(f, args) => Term::Compound(f.clone(), args.iter().map(|a| a.substitute(s)).collect()),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Term::Var(_) | Term::Atom(_) => 1,
            Term::Compound(_, args) => 1 + args.iter().map(Term::depth).max().unwrap_or(0),
        }
    }

    /// Number of functor and constant symbol occurrences; variables count 0.
    pub fn size(&self) -> usize {
        term_size(self)
    }

    /// If `self` and `other` are variants, the variable renaming from `self`
    /// to `other`.
    pub fn variant_map(&self, other: &Term) -> Option<BTreeMap<String, String>> {
        fn go(a: &Term, b: &Term, fwd: &mut BTreeMap<String, String>, back: &mut BTreeMap<String, String>) -> bool {
            match (a, b) {
                (Term::Var(x), Term::Var(y)) => match (fwd.get(x), back.get(y)) {
                    (None, None) => {
                        fwd.insert(x.clone(), y.clone());
                        back.insert(y.clone(), x.clone());
                        true
                    }
                    (Some(y2), Some(x2)) => y2 == y && x2 == x,
                    _ => false,
                },
                (Term::Atom(x), Term::Atom(y)) => x == y,
                (Term::Compound(f, xs), Term::Compound(g, ys)) => {
                    f == g && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| go(x, y, fwd, back))
                }
                _ => false,
            }
        }
        let (mut fwd, mut back) = (BTreeMap::new(), BTreeMap::new());
        go(self, other, &mut fwd, &mut back).then_some(fwd)
    }
}

/// Number of functor and constant symbol occurrences in `t`.
pub fn term_size(t: &Term) -> usize {
    match t {
        Term::Var(_) => 0,
        Term::Atom(_) => 1,
        Term::Compound(_, args) => 1 + args.iter().map(term_size).sum::<usize>(),
    }
}

/// Whether `name` prints without quotes.
pub(crate) fn is_plain_atom(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_lowercase() => chars.all(|c| c.is_ascii_alphanumeric() || c == '_'),
        Some(c) if c.is_ascii_digit() => name.chars().all(|c| c.is_ascii_digit()),
        _ => name == NIL || name == "!" || name == ";",
    }
}

pub(crate) fn write_atom(f: &mut impl fmt::Write, name: &str) -> fmt::Result {
    if is_plain_atom(name) {
        f.write_str(name)
    } else {
        f.write_char('\'')?;
        for c in name.chars() {
            match c {
                '\'' => f.write_str("\\'")?,
                '\\' => f.write_str("\\\\")?,
                '\n' => f.write_str("\\n")?,
                c => f.write_char(c)?,
            }
        }
        f.write_char('\'')
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => f.write_str(v),
            Term::Atom(a) => write_atom(f, a),
            Term::Compound(name, args) if name == CONS && args.len() == 2 => {
                f.write_str("[")?;
                write!(f, "{}", args[0])?;
                let mut tail = &args[1];
                loop {
                    match tail {
                        Term::Compound(n, a) if n == CONS && a.len() == 2 => {
                            write!(f, ",{}", a[0])?;
                            tail = &a[1];
                        }
                        Term::Atom(n) if n == NIL => break,
                        other => {
                            write!(f, "|{other}")?;
                            break;
                        }
                    }
                }
                f.write_str("]")
            }
            Term::Compound(name, args) if name == "=" && args.len() == 2 => {
                write!(f, "{} = {}", args[0], args[1])
            }
            Term::Compound(name, args) => {
                write_atom(f, name)?;
                f.write_str("(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(s: &str) -> Term {
        Term::atom(s)
    }

    #[test]
    fn sizes() {
        assert_eq!(term_size(&a("a")), 1);
        assert_eq!(term_size(&Term::compound("f", vec![a("a"), Term::var("X")])), 2);
        let t = Term::compound("f", vec![Term::compound("g", vec![a("a")]), a("b")]);
        assert_eq!(term_size(&t), 4);
    }

    #[test]
    fn list_display() {
        let l = Term::list([a("a"), a("b")], Term::var("T"));
        assert_eq!(l.to_string(), "[a,b|T]");
        assert_eq!(Term::list([a("a")], Term::nil()).to_string(), "[a]");
        assert_eq!(Term::compound("=<", vec![a("1"), a("2")]).to_string(), "'=<'(1,2)");
    }

    #[test]
    fn variants() {
        let t1 =
            Term::compound("q", vec![Term::var("L"), Term::var("Ys"), Term::cons(Term::var("X"), Term::var("R2"))]);
        let t2 =
            Term::compound("q", vec![Term::var("Xs"), Term::var("Ys"), Term::cons(Term::var("Z"), Term::var("Zs"))]);
        let m = t1.variant_map(&t2).unwrap();
        assert_eq!(m["L"], "Xs");
        assert_eq!(m["R2"], "Zs");
        let t3 = Term::compound("q", vec![Term::var("A"), Term::var("A"), Term::var("B")]);
        let t4 = Term::compound("q", vec![Term::var("A"), Term::var("B"), Term::var("B")]);
        assert!(t3.variant_map(&t4).is_none());
    }
}
