#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use absdist::analyzer::sld::{concrete_sld, SldOptions};
use absdist::analyzer::{analyze, AnalyzeOptions, AndOrGraph, NodeRow};
use absdist::domain::groundness::{GroundSub, GroundVal};
use absdist::domain::sharing::{ShWidenParams, SharingSub};
use absdist::domain::{AbstractSub, ConcreteSub, DomainKind};
use absdist::parser::{parse_program, parse_term};
use absdist::program::{Program, ProgramPoint};
use absdist::term::Term;

pub fn data(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(rel)
}

pub fn program(rel: &str) -> Program {
    parse_program(&std::fs::read_to_string(data(rel)).unwrap()).unwrap()
}

pub fn analyze_file(rel: &str, domain: DomainKind) -> AndOrGraph {
    analyze(&program(rel), None, AnalyzeOptions::new(domain)).unwrap()
}

/// Reference rows for quicksort with the partition trust: literal, call, success.
pub const TRUSTED_ROWS: [(&str, &str, &str); 5] = [
    ("quicksort(Xs,Ys)", "{Xs/g,Ys/ng}", "{Xs/g,Ys/g}"),
    ("qsort(Xs,Ys,[])", "{Xs/g,Ys/ng}", "{Xs/g,Ys/g}"),
    ("partition(Xs,X,L,R)", "{Xs/g,X/g,L/ng,R/ng}", "{Xs/g,X/g,L/g,R/g}"),
    ("qsort(Xs,Ys,Zs)", "{Xs/g,Ys/ng,Zs/g}", "{Xs/g,Ys/g,Zs/g}"),
    ("qsort(Xs,Ys,[Z|Zs])", "{Xs/g,Ys/ng,Z/g,Zs/g}", "{Xs/g,Ys/g,Z/g,Zs/g}"),
];

/// Reference rows for quicksort without partition information.
pub const UNTRUSTED_ROWS: [(&str, &str, &str); 8] = [
    ("quicksort(Xs,Ys)", "{Xs/g,Ys/ng}", "{Xs/g,Ys/any}"),
    ("qsort(Xs,Ys,[])", "{Xs/g,Ys/ng}", "{Xs/g,Ys/any}"),
    ("partition(Xs,X,L,R)", "{Xs/g,X/g,L/ng,R/ng}", "{Xs/g,X/g,L/any,R/any}"),
    ("qsort(Xs,Ys,Zs)", "{Xs/any,Ys/ng,Zs/g}", "{Xs/any,Ys/any,Zs/g}"),
    ("partition(Xs,X,L,R)", "{Xs/any,X/any,L/ng,R/ng}", "{Xs/any,X/any,L/any,R/any}"),
    ("qsort(Xs,Ys,Zs)", "{Xs/any,Ys/ng,Zs/any}", "{Xs/any,Ys/any,Zs/any}"),
    ("qsort(Xs,Ys,[Z|Zs])", "{Xs/any,Ys/ng,Z/any,Zs/any}", "{Xs/any,Ys/any,Z/any,Zs/any}"),
    ("qsort(Xs,Ys,[Z|Zs])", "{Xs/any,Ys/ng,Z/g,Zs/any}", "{Xs/any,Ys/any,Z/g,Zs/any}"),
];

/// Reference node numbers (1-based) grouped by the program point they belong to,
/// with our clause numbering for qsort/3.
pub const UNTRUSTED_POINTS: [(&str, &[usize]); 5] = [
    ("quicksort/2/0", &[1]),
    ("quicksort/2/1/1", &[2]),
    ("qsort/3/2/1", &[3, 5]),
    ("qsort/3/2/2", &[4, 6]),
    ("qsort/3/2/3", &[7, 8]),
];

pub fn parse_gr(text: &str) -> BTreeMap<String, String> {
    let inner = text.trim().trim_start_matches('{').trim_end_matches('}');
    inner
        .split(',')
        .filter(|s| !s.is_empty())
        .map(|kv| {
            let (k, v) = kv.split_once('/').unwrap();
            (k.trim().to_string(), v.trim().to_string())
        })
        .collect()
}

/// Canonical text of a reference row after renaming its variables onto the
/// variables of `literal`, or `None` if the literals are not variants.
pub fn canonical_row(reference: (&str, &str, &str), literal: &Term) -> Option<String> {
    let lit = parse_term(reference.0).unwrap();
    let map = lit.variant_map(literal)?;
    let rename = |s: &str| {
        let m: BTreeMap<String, String> = parse_gr(s).into_iter().map(|(k, v)| (map[&k].clone(), v)).collect();
        let body: Vec<String> = m.iter().map(|(k, v)| format!("{k}/{v}")).collect();
        format!("{{{}}}", body.join(","))
    };
    Some(format!("{} {} {}", literal, rename(reference.1), rename(reference.2)))
}

pub fn our_row(r: &NodeRow) -> String {
    format!("{} {} {}", r.literal, r.call, r.success)
}

/// Matches every analysis row to a distinct reference row. Returns, for each
/// of our nodes, the 1-based reference node number.
pub fn match_rows(rows: &[NodeRow], reference: &[(&str, &str, &str)]) -> Result<Vec<usize>, String> {
    if rows.len() != reference.len() {
        return Err(format!("{} rows, expected {}", rows.len(), reference.len()));
    }
    let mut used = vec![false; reference.len()];
    let mut out = Vec::new();
    for r in rows {
        let ours = our_row(r);
        let hit = (0..reference.len())
            .find(|&i| !used[i] && canonical_row(reference[i], &r.literal).as_deref() == Some(&ours));
        match hit {
            Some(i) => {
                used[i] = true;
                out.push(i + 1);
            }
            None => return Err(format!("no reference row matches `{ours}`")),
        }
    }
    Ok(out)
}

/// Independent per-variable groundness metric used as a test oracle.
pub fn oracle_gr(a: &BTreeMap<String, String>, b: &BTreeMap<String, String>) -> f64 {
    let m = |x: &str, y: &str| -> f64 {
        match (x, y) {
            _ if x == y => 0.0,
            ("g", "ng") | ("ng", "g") => 1.0,
            _ => 0.5,
        }
    };
    let sq: f64 = a.iter().map(|(k, v)| m(v, &b[k]).powi(2)).sum();
    (sq / a.len() as f64).sqrt()
}

pub const CORPUS: [&str; 7] = ["append", "nrev", "qsort", "member", "permutation", "flatten", "alias"];

pub fn corpus_program(name: &str) -> Program {
    program(&format!("corpus/{name}.pl"))
}

pub fn domain_configs() -> Vec<(String, AnalyzeOptions)> {
    vec![
        ("gr".into(), AnalyzeOptions::new(DomainKind::Gr)),
        ("share".into(), AnalyzeOptions::new(DomainKind::Share)),
        ("share+widen(2)".into(), AnalyzeOptions::new(DomainKind::Share).widen(ShWidenParams::new(2).unwrap())),
        ("share+widen(1)".into(), AnalyzeOptions::new(DomainKind::Share).widen(ShWidenParams::new(1).unwrap())),
    ]
}

const GROUND_POOL: [&str; 7] = ["[]", "[1]", "[2,1]", "[1,3,2]", "a", "[a,[b,c]]", "[[1],2]"];
const OPEN_POOL: [&str; 3] = ["_", "[_|_]", "[a,_]"];

/// Concrete goals admitted by the program's first entry declaration.
pub fn entry_goals(p: &Program, cap: usize) -> Vec<Term> {
    let e = &p.entries[0];
    let args = e.head.args();
    let prop = |v: &str| {
        e.props.iter().find_map(|t| match t {
            Term::Compound(n, a) if a[0].as_var() == Some(v) => Some(n.clone()),
            _ => None,
        })
    };
    let mut goals: Vec<Vec<String>> = vec![Vec::new()];
    for a in args {
        let choices: Vec<&str> = match prop(a.as_var().unwrap()).as_deref() {
            Some("ground") => GROUND_POOL.to_vec(),
            Some("var") => vec!["_"],
            _ => GROUND_POOL.iter().chain(OPEN_POOL.iter()).copied().collect(),
        };
        goals = goals
            .into_iter()
            .flat_map(|g| {
                choices.iter().map(move |c| {
                    let mut g = g.clone();
                    g.push(c.to_string());
                    g
                })
            })
            .collect();
    }
    let name = e.head.functor().unwrap().0;
    goals
        .into_iter()
        .take(cap)
        .map(|args| {
            let text = if args.is_empty() { name.to_string() } else { format!("{name}({})", args.join(",")) };
            parse_term(&text).unwrap()
        })
        .collect()
}

pub fn abstract_one(kind: DomainKind, theta: &ConcreteSub, vars: &[String]) -> AbstractSub {
    match kind {
        DomainKind::Gr => AbstractSub::Gr(GroundSub::abstract_concrete(std::slice::from_ref(theta), vars)),
        DomainKind::Share => {
            AbstractSub::Share(SharingSub::abstract_concrete(std::slice::from_ref(theta), vars).unwrap())
        }
    }
}

fn join_at(g: &AndOrGraph, pp: &ProgramPoint, call: bool) -> Option<AbstractSub> {
    g.nodes
        .iter()
        .filter(|n| &n.pp == pp)
        .map(|n| if call { n.call.clone() } else { n.success.clone() })
        .reduce(|a, b| a.join(&b).unwrap())
}

#[derive(Debug, Default)]
pub struct Soundness {
    pub goals: usize,
    pub answers: usize,
    pub observations: usize,
    pub violations: Vec<String>,
}

/// Runs concrete goals for the entry through SLD (depth ≤ `depth`) and
/// checks every answer and every call/exit observation against `g`.
pub fn check_soundness(p: &Program, g: &AndOrGraph, depth: usize) -> Soundness {
    let mut s = Soundness::default();
    let root = g.root();
    let root_vars = root.literal.vars();
    for goal in entry_goals(p, 400) {
        // bind the head variables to the goal arguments
        let head_theta: ConcreteSub = root
            .literal
            .args()
            .iter()
            .zip(goal.args())
            .map(|(h, a)| (h.as_var().unwrap().to_string(), a.clone()))
            .collect();
        let call = abstract_one(g.domain, &head_theta, &root_vars);
        if !call.leq(&root.call).unwrap() {
            continue;
        }
        s.goals += 1;
        let r = concrete_sld(p, &goal, SldOptions::depth(depth).observe());
        for ans in &r.answers {
            s.answers += 1;
            let theta: ConcreteSub = head_theta.iter().map(|(k, v)| (k.clone(), v.substitute(ans))).collect();
            let a = abstract_one(g.domain, &theta, &root_vars);
            if !a.leq(&root.success).unwrap() {
                s.violations.push(format!("{goal}: answer {a} not below root success {}", root.success));
            }
        }
        for o in &r.observations {
            if o.pp.site.is_none() {
                continue;
            }
            s.observations += 1;
            let vars: Vec<String> = o.bindings.keys().cloned().collect();
            let a = abstract_one(g.domain, &o.bindings, &vars);
            match join_at(g, &o.pp, o.call) {
                None => s.violations.push(format!("{goal}: {} reached concretely but not in the analysis", o.pp)),
                Some(b) => {
                    let b = reorder(&b, &vars);
                    if !a.leq(&b).unwrap() {
                        let what = if o.call { "call" } else { "exit" };
                        s.violations.push(format!("{goal}: {what} at {} is {a}, analysis has {b}", o.pp));
                    }
                }
            }
        }
    }
    s
}

fn reorder(b: &AbstractSub, vars: &[String]) -> AbstractSub {
    match b {
        AbstractSub::Gr(g) => AbstractSub::Gr(g.project(vars)),
        AbstractSub::Share(sh) => AbstractSub::Share(sh.project(vars)),
    }
}

pub fn gv(s: &str) -> GroundVal {
    GroundVal::parse(s).unwrap()
}
