//! Depth-bounded SLD resolution, used to spot-check analysis soundness.

use std::collections::BTreeMap;
use std::rc::Rc;

use crate::domain::ConcreteSub;
use crate::program::{PredKey, Program, ProgramPoint};
use crate::term::Term;

#[derive(Debug, Clone, Copy)]
pub struct SldOptions {
    /// Maximum number of user clause resolutions along one derivation.
    pub depth: usize,
    pub max_answers: usize,
    /// Record bindings of literal variables at each call and exit.
    pub observe: bool,
}

impl SldOptions {
    pub fn depth(depth: usize) -> Self {
        SldOptions { depth, max_answers: 100_000, observe: false }
    }

    pub fn observe(mut self) -> Self {
        self.observe = true;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub pp: ProgramPoint,
    /// `true` at call time, `false` at exit.
    pub call: bool,
    /// Bindings of the literal's variables, named as in the source clause.
    pub bindings: ConcreteSub,
}

#[derive(Debug, Clone, Default)]
pub struct SldResult {
    /// Answers restricted to the goal's variables.
    pub answers: Vec<ConcreteSub>,
    /// Some derivation was cut off by the depth bound or the answer limit.
    pub truncated: bool,
    pub observations: Vec<Observation>,
}

#[derive(Debug)]
struct Site {
    pp: ProgramPoint,
    lit: Term,
    rename: BTreeMap<String, String>,
}

#[derive(Debug, Clone)]
enum Goal {
    Lit(Term, Option<Rc<Site>>),
    Exit(Rc<Site>),
}

#[derive(Debug)]
struct Cell(Goal, Goals);

type Goals = Option<Rc<Cell>>;

fn push(g: Goal, rest: Goals) -> Goals {
    Some(Rc::new(Cell(g, rest)))
}

type Subst = BTreeMap<String, Term>;

fn walk<'a>(t: &'a Term, s: &'a Subst) -> &'a Term {
    let mut cur = t;
    while let Term::Var(v) = cur {
        match s.get(v) {
            Some(b) => cur = b,
            None => break,
        }
    }
    cur
}

fn occurs(x: &str, t: &Term, s: &Subst) -> bool {
    match walk(t, s) {
        Term::Var(y) => x == y,
        Term::Compound(_, args) => args.iter().any(|a| occurs(x, a, s)),
        Term::Atom(_) => false,
    }
}

/// Unification with occurs check: all terms stay finite.
fn unify(a: &Term, b: &Term, s: &mut Subst) -> bool {
    let (a, b) = (walk(a, s).clone(), walk(b, s).clone());
    match (&a, &b) {
        (Term::Var(x), Term::Var(y)) if x == y => true,
        (Term::Var(x), _) => {
            if occurs(x, &b, s) {
                return false;
            }
            s.insert(x.clone(), b);
            true
        }
        (_, Term::Var(y)) => {
            if occurs(y, &a, s) {
                return false;
            }
            s.insert(y.clone(), a);
            true
        }
        (Term::Atom(x), Term::Atom(y)) => x == y,
        (Term::Compound(f, xs), Term::Compound(g, ys)) => {
            f == g && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| unify(x, y, s))
        }
        _ => false,
    }
}

fn resolve(t: &Term, s: &Subst) -> Term {
    match walk(t, s) {
        Term::Compound(f, args) => Term::Compound(f.clone(), args.iter().map(|a| resolve(a, s)).collect()),
        other => other.clone(),
    }
}

fn eval(t: &Term, s: &Subst) -> Option<i64> {
    match walk(t, s) {
        Term::Atom(a) => a.parse().ok(),
        Term::Compound(f, args) if args.len() == 1 && f == "-" => eval(&args[0], s)?.checked_neg(),
        Term::Compound(f, args) if args.len() == 2 => {
            let (x, y) = (eval(&args[0], s)?, eval(&args[1], s)?);
            match f.as_str() {
                "+" => x.checked_add(y),
                "-" => x.checked_sub(y),
                "*" => x.checked_mul(y),
                "//" | "/" => x.checked_div(y),
                "mod" => x.checked_rem_euclid(y),
                _ => None,
            }
        }
        _ => None,
    }
}

struct Machine<'p> {
    program: &'p Program,
    opts: SldOptions,
    query_vars: Vec<String>,
    fresh: usize,
    out: SldResult,
}

enum Builtin {
    Done(Option<Subst>),
    NotBuiltin,
}

impl Machine<'_> {
    fn observe(&mut self, site: &Site, call: bool, s: &Subst) {
        if !self.opts.observe {
            return;
        }
        let bindings = site
            .lit
            .vars()
            .into_iter()
            .map(|v| {
                let renamed = site.rename.get(&v).cloned().unwrap_or_else(|| v.clone());
                (v, resolve(&Term::Var(renamed), s))
            })
            .collect();
        self.out.observations.push(Observation { pp: site.pp.clone(), call, bindings });
    }

    fn builtin(&self, goal: &Term, s: &Subst) -> Builtin {
        let Some((name, arity)) = goal.functor() else {
            return Builtin::Done(None);
        };
        let args = goal.args();
        let keep = |ok: bool| Builtin::Done(ok.then(|| s.clone()));
        let cmp = |f: fn(i64, i64) -> bool| match (eval(&args[0], s), eval(&args[1], s)) {
            (Some(x), Some(y)) => keep(f(x, y)),
            _ => Builtin::Done(None),
        };
        match (name, arity) {
            ("true" | "!" | "nl", 0) => keep(true),
            ("fail" | "false", 0) => keep(false),
            ("write", 1) => keep(true),
            ("=", 2) => {
                let mut s2 = s.clone();
                let ok = unify(&args[0], &args[1], &mut s2);
                Builtin::Done(ok.then_some(s2))
            }
            ("\\=", 2) => {
                let mut s2 = s.clone();
                keep(!unify(&args[0], &args[1], &mut s2))
            }
            ("==", 2) => keep(resolve(&args[0], s) == resolve(&args[1], s)),
            ("\\==", 2) => keep(resolve(&args[0], s) != resolve(&args[1], s)),
            ("ground", 1) => keep(resolve(&args[0], s).is_ground()),
            ("var", 1) => keep(walk(&args[0], s).is_var()),
            ("nonvar", 1) => keep(!walk(&args[0], s).is_var()),
            ("atom" | "atomic", 1) => keep(matches!(walk(&args[0], s), Term::Atom(_))),
            ("number" | "integer", 1) => keep(matches!(walk(&args[0], s), Term::Atom(a) if a.parse::<i64>().is_ok())),
            ("is", 2) => match eval(&args[1], s) {
                Some(v) => {
                    let mut s2 = s.clone();
                    let ok = unify(&args[0], &Term::atom(v.to_string()), &mut s2);
                    Builtin::Done(ok.then_some(s2))
                }
                None => Builtin::Done(None),
            },
            ("<", 2) => cmp(|x, y| x < y),
            (">", 2) => cmp(|x, y| x > y),
            ("=<", 2) => cmp(|x, y| x <= y),
            (">=", 2) => cmp(|x, y| x >= y),
            ("=:=", 2) => cmp(|x, y| x == y),
            ("=\\=", 2) => cmp(|x, y| x != y),
            _ => Builtin::NotBuiltin,
        }
    }

    fn solve(&mut self, goals: &Goals, s: &Subst, used: usize) {
        if self.out.answers.len() >= self.opts.max_answers {
            self.out.truncated = true;
            return;
        }
        let Some(node) = goals else {
            let ans = self.query_vars.iter().map(|v| (v.clone(), resolve(&Term::Var(v.clone()), s))).collect();
            self.out.answers.push(ans);
            return;
        };
        let (goal, rest) = (&node.0, &node.1);
        let (term, site) = match goal {
            Goal::Exit(site) => {
                self.observe(site, false, s);
                return self.solve(rest, s, used);
            }
            Goal::Lit(t, site) => (t, site),
        };
        if let Some(site) = site {
            self.observe(site, true, s);
        }
        let rest = match site {
            Some(site) => push(Goal::Exit(site.clone()), rest.clone()),
            None => rest.clone(),
        };
        let key = match PredKey::of(walk(term, s)) {
            Some(k) => k,
            None => return,
        };
        let pred = self.program.predicate(&key);
        if pred.is_none() {
            if let Builtin::Done(Some(s2)) = self.builtin(term, s) {
                self.solve(&rest, &s2, used);
            }
            return;
        }
        if used >= self.opts.depth {
            self.out.truncated = true;
            return;
        }
        let pred = pred.expect("checked");
        for (ci, clause) in pred.clauses.iter().enumerate() {
            self.fresh += 1;
            let rename: BTreeMap<String, String> =
                clause.vars().into_iter().map(|v| (v.clone(), format!("{v}#{}", self.fresh))).collect();
            let mut s2 = s.clone();
            if !unify(&clause.head.rename(&rename), term, &mut s2) {
                continue;
            }
            let rename = rename.clone();
            let mut body = rest.clone();
            for (li, lit) in clause.body.iter().enumerate().rev() {
                let site = Rc::new(Site {
                    pp: ProgramPoint::literal(key.clone(), ci + 1, li + 1),
                    lit: lit.clone(),
                    rename: rename.clone(),
                });
                body = push(Goal::Lit(lit.rename(&rename), Some(site)), body);
            }
            self.solve(&body, &s2, used + 1);
        }
    }
}

/// All answers to `goal` reachable within `opts.depth` clause resolutions.
/// Cut is read as `true`, so the answer set may be larger than Prolog's.
pub fn concrete_sld(program: &Program, goal: &Term, opts: SldOptions) -> SldResult {
    let mut m = Machine { program, opts, query_vars: goal.vars(), fresh: 0, out: SldResult::default() };
    let site = PredKey::of(goal)
        .map(|k| Rc::new(Site { pp: ProgramPoint::entry(k), lit: goal.clone(), rename: BTreeMap::new() }));
    let goals = push(Goal::Lit(goal.clone(), site), None);
    m.solve(&goals, &Subst::new(), 0);
    m.out
}
