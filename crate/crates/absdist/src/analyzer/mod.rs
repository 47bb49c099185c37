//! Goal-dependent top-down analysis producing AND-OR graphs.
//!
//! The fixpoint is computed over a memo table keyed by predicate and call
//! pattern (one entry per distinct pattern). Each round re-evaluates every
//! key reachable from the entry, joining new success patterns into the old
//! ones, until a full round changes nothing. The graph is then built from
//! the stable table: one OR-node per program point and call substitution.

pub mod sld;
pub mod transfer;

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use serde_json::{json, Value};
use thiserror::Error;

use crate::domain::sharing::ShWidenParams;
use crate::domain::{AbstractSub, DomainError, DomainKind};
use crate::parser::parse_term;
use crate::program::{entry_to_abstract, EntryError, PredKey, Program, ProgramPoint, TrustDecl};
use crate::term::Term;
use transfer::*;

/// Upper bound on fixpoint rounds.
pub const MAX_ROUNDS: usize = 10_000;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("no entry declaration{}", .0.as_ref().map(|k| format!(" for {k}")).unwrap_or_default())]
    MissingEntry(Option<String>),
    #[error(transparent)]
    Entry(#[from] EntryError),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("fixpoint not reached after {0} rounds")]
    NoFixpoint(usize),
    #[error("malformed analysis file: {0}")]
    Format(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AndNode {
    /// 1-based clause number.
    pub clause: usize,
    pub entry: AbstractSub,
    pub exit: AbstractSub,
    /// (1-based literal number, OR-node id)
    pub children: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrNode {
    pub id: usize,
    pub pp: ProgramPoint,
    pub literal: Term,
    pub call: AbstractSub,
    pub success: AbstractSub,
    pub and_nodes: Vec<AndNode>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AndOrGraph {
    pub domain: DomainKind,
    pub entry: PredKey,
    pub widen: Option<usize>,
    pub root: usize,
    pub nodes: Vec<OrNode>,
    /// Every program point of the analyzed program.
    pub program_points: Vec<ProgramPoint>,
}

/// Analysis options.
#[derive(Debug, Clone, Copy)]
pub struct AnalyzeOptions {
    pub domain: DomainKind,
    pub widen: Option<ShWidenParams>,
}

impl AnalyzeOptions {
    pub fn new(domain: DomainKind) -> Self {
        AnalyzeOptions { domain, widen: None }
    }

    pub fn widen(mut self, params: ShWidenParams) -> Self {
        self.widen = Some(params);
        self
    }
}

/// Row of [`AndOrGraph::node_table`].
#[derive(Debug, Clone, PartialEq)]
pub struct NodeRow {
    pub id: usize,
    pub pp: ProgramPoint,
    pub literal: Term,
    pub call: AbstractSub,
    pub success: AbstractSub,
}

enum Callee<'p> {
    Builtin,
    Trusted(&'p TrustDecl),
    User(PredKey),
    Imported,
    Undefined,
}

const TYPE_TESTS: &[&str] = &["atom", "atomic", "number", "integer"];
const ARITH: &[&str] = &["is", "<", ">", "=<", ">=", "=:=", "=\\="];
const NO_BINDING: &[&str] = &["==", "\\==", "\\=", "@<", "@>", "@=<", "@>=", "nonvar", "write", "nl", "true", "!"];

fn is_builtin(k: &PredKey) -> bool {
    match k.arity {
        0 => ["true", "!", "fail", "false", "nl"].contains(&k.name.as_str()),
        1 => ["ground", "var", "nonvar", "write"].contains(&k.name.as_str()) || TYPE_TESTS.contains(&k.name.as_str()),
        2 => k.name == "=" || ARITH.contains(&k.name.as_str()) || NO_BINDING.contains(&k.name.as_str()),
        _ => false,
    }
}

type Key = (PredKey, AbstractSub);

struct Engine<'p> {
    program: &'p Program,
    widen: Option<ShWidenParams>,
    memo: HashMap<Key, AbstractSub>,
    visited: HashSet<Key>,
    changed: bool,
    frozen: bool,
}

impl<'p> Engine<'p> {
    fn callee(&self, key: &PredKey) -> Callee<'p> {
        if let Some(t) = self.program.trust(key) {
            Callee::Trusted(t)
        } else if self.program.predicate(key).is_some() {
            Callee::User(key.clone())
        } else if is_builtin(key) {
            Callee::Builtin
        } else if self.program.is_imported(key) {
            Callee::Imported
        } else {
            Callee::Undefined
        }
    }

    fn builtin(&self, lit: &Term, beta: &AbstractSub, vars: &[String]) -> Result<AbstractSub, AnalysisError> {
        let (name, arity) = lit.functor().expect("callable");
        let args = lit.args();
        Ok(match (name, arity) {
            ("=", 2) => unify(beta, &args[0], &args[1]),
            ("ground", 1) => assume_ground(beta, &args[0]),
            ("var", 1) => assume_var(beta, &args[0]),
            ("fail" | "false", 0) => bottom_like(beta, vars)?,
            (n, 1) if TYPE_TESTS.contains(&n) => assume_ground(beta, &args[0]),
            (n, _) if NO_BINDING.contains(&n) => beta.clone(),
            _ => top_on(beta, &lit.vars()),
        })
    }

    /// Substitution after executing `lit` from `beta` (over `vars`).
    fn call(&mut self, lit: &Term, beta: &AbstractSub, vars: &[String]) -> Result<AbstractSub, AnalysisError> {
        if beta.is_bottom() {
            return Ok(beta.clone());
        }
        let key = PredKey::of(lit).expect("callable");
        let args = lit.args();
        let success = match self.callee(&key) {
            Callee::Builtin => return self.builtin(lit, beta, vars),
            Callee::Undefined => return Ok(bottom_like(beta, vars)?),
            Callee::Imported => top_pattern(&pattern_of(beta, args)?),
            Callee::Trusted(t) => {
                let pattern = pattern_of(beta, args)?;
                trust_success(&pattern, t)?.unwrap_or_else(|| top_pattern(&pattern))
            }
            Callee::User(k) => {
                let pattern = widen(pattern_of(beta, args)?, self.widen);
                self.eval_key(k, pattern)?
            }
        };
        Ok(apply_success(beta, args, &success)?)
    }

    fn eval_key(&mut self, pred: PredKey, pattern: AbstractSub) -> Result<AbstractSub, AnalysisError> {
        if pattern.is_bottom() {
            return Ok(pattern);
        }
        let key = (pred, pattern);
        if self.frozen || self.visited.contains(&key) {
            if let Some(v) = self.memo.get(&key) {
                return Ok(v.clone());
            }
        }
        self.visited.insert(key.clone());
        let (pred, pattern) = &key;
        let pos = positional(pred.arity);
        let old = match self.memo.get(&key) {
            Some(v) => v.clone(),
            None => {
                let b = bottom_like(pattern, &pos)?;
                self.memo.insert(key.clone(), b.clone());
                b
            }
        };
        let mut new = bottom_like(pattern, &pos)?;
        let clauses = &self.program.predicate(pred).expect("user predicate").clauses;
        for clause in clauses {
            let vars = clause.vars();
            let mut beta = entry_of(pattern, &clause.head, &vars)?;
            for lit in &clause.body {
                beta = self.call(lit, &beta, &vars)?;
            }
            new = new.join(&pattern_of(&beta, clause.head.args())?)?;
        }
        let joined = old.join(&new)?;
        if joined != old {
            self.changed = true;
            self.memo.insert(key, joined.clone());
        }
        Ok(joined)
    }
}

struct Builder<'e, 'p> {
    engine: &'e mut Engine<'p>,
    index: HashMap<(ProgramPoint, AbstractSub), usize>,
    nodes: Vec<OrNode>,
    queue: VecDeque<usize>,
}

impl Builder<'_, '_> {
    fn node(&mut self, pp: ProgramPoint, literal: &Term, call: AbstractSub) -> Result<usize, AnalysisError> {
        if let Some(&id) = self.index.get(&(pp.clone(), call.clone())) {
            return Ok(id);
        }
        let vars = literal.vars();
        let success = project(&self.engine.call(literal, &call, &vars)?, &vars);
        let id = self.nodes.len();
        self.index.insert((pp.clone(), call.clone()), id);
        self.nodes.push(OrNode { id, pp, literal: literal.clone(), call, success, and_nodes: Vec::new() });
        self.queue.push_back(id);
        Ok(id)
    }

    fn expand(&mut self, id: usize) -> Result<(), AnalysisError> {
        let (literal, call) = (self.nodes[id].literal.clone(), self.nodes[id].call.clone());
        if call.is_bottom() {
            return Ok(());
        }
        let key = PredKey::of(&literal).expect("callable");
        if !matches!(self.engine.callee(&key), Callee::User(_)) {
            return Ok(());
        }
        let program = self.engine.program;
        let pattern = widen(pattern_of(&call, literal.args())?, self.engine.widen);
        let mut ands = Vec::new();
        for (ci, clause) in program.predicate(&key).expect("user predicate").clauses.iter().enumerate() {
            let vars = clause.vars();
            let entry = entry_of(&pattern, &clause.head, &vars)?;
            let mut beta = entry.clone();
            let mut children = Vec::new();
            for (li, lit) in clause.body.iter().enumerate() {
                let pp = ProgramPoint::literal(key.clone(), ci + 1, li + 1);
                let child = self.node(pp, lit, project(&beta, &lit.vars()))?;
                children.push((li + 1, child));
                beta = self.engine.call(lit, &beta, &vars)?;
            }
            ands.push(AndNode { clause: ci + 1, entry, exit: beta, children });
        }
        self.nodes[id].and_nodes = ands;
        Ok(())
    }
}

/// Analyzes `program` from the entry declaration for `entry` (or the first
/// entry when `None`).
pub fn analyze(program: &Program, entry: Option<&PredKey>, opts: AnalyzeOptions) -> Result<AndOrGraph, AnalysisError> {
    let decl = program.entry(entry).ok_or_else(|| AnalysisError::MissingEntry(entry.map(|k| k.to_string())))?;
    let lambda = entry_to_abstract(decl, opts.domain)?;
    let head = decl.head.clone();
    let head_vars = head.vars();
    let mut engine = Engine {
        program,
        widen: opts.widen,
        memo: HashMap::new(),
        visited: HashSet::new(),
        changed: false,
        frozen: false,
    };
    let mut rounds = 0;
    loop {
        engine.visited.clear();
        engine.changed = false;
        engine.call(&head, &lambda, &head_vars)?;
        rounds += 1;
        if !engine.changed {
            break;
        }
        if rounds >= MAX_ROUNDS {
            return Err(AnalysisError::NoFixpoint(rounds));
        }
    }
    engine.frozen = true;
    let mut b = Builder { engine: &mut engine, index: HashMap::new(), nodes: Vec::new(), queue: VecDeque::new() };
    let root = b.node(ProgramPoint::entry(decl.pred()), &head, lambda)?;
    while let Some(id) = b.queue.pop_front() {
        b.expand(id)?;
    }
    Ok(AndOrGraph {
        domain: opts.domain,
        entry: decl.pred(),
        widen: opts.widen.map(|w| w.threshold()),
        root,
        nodes: b.nodes,
        program_points: program.program_points(),
    })
}

impl AndOrGraph {
    pub fn root(&self) -> &OrNode {
        &self.nodes[self.root]
    }

    /// `(id, program point, literal, λc, λs)` rows in node-id order.
    pub fn node_table(&self) -> Vec<NodeRow> {
        self.nodes
            .iter()
            .map(|n| NodeRow {
                id: n.id,
                pp: n.pp.clone(),
                literal: n.literal.clone(),
                call: n.call.clone(),
                success: n.success.clone(),
            })
            .collect()
    }

    /// OR-node children keyed by (clause, literal).
    pub fn children(&self, id: usize) -> Vec<((usize, usize), usize)> {
        self.nodes[id].and_nodes.iter().flat_map(|a| a.children.iter().map(move |&(l, c)| ((a.clause, l), c))).collect()
    }

    /// Program points that carry at least one OR-node.
    pub fn reached_points(&self) -> BTreeSet<ProgramPoint> {
        self.nodes.iter().map(|n| n.pp.clone()).collect()
    }

    pub fn to_json(&self) -> Value {
        let nodes: Vec<Value> = self
            .nodes
            .iter()
            .map(|n| {
                json!({
                    "id": n.id,
                    "pp": n.pp.to_string(),
                    "literal": n.literal.to_string(),
                    "call": n.call.to_json(),
                    "success": n.success.to_json(),
                })
            })
            .collect();
        let and_nodes: Vec<Value> = self
            .nodes
            .iter()
            .flat_map(|n| {
                n.and_nodes.iter().map(move |a| {
                    json!({"or": n.id, "clause": a.clause, "entry": a.entry.to_json(), "exit": a.exit.to_json()})
                })
            })
            .collect();
        let edges: Vec<Value> = self
            .nodes
            .iter()
            .flat_map(|n| {
                n.and_nodes.iter().flat_map(move |a| {
                    a.children
                        .iter()
                        .map(move |&(l, to)| json!({"from": n.id, "clause": a.clause, "literal": l, "to": to}))
                })
            })
            .collect();
        json!({
            "domain": self.domain.name(),
            "entry": self.entry.to_string(),
            "widen": self.widen,
            "root": self.root,
            "program_points": self.program_points.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
            "nodes": nodes,
            "and_nodes": and_nodes,
            "edges": edges,
        })
    }

    pub fn from_json(v: &Value) -> Result<AndOrGraph, AnalysisError> {
        let bad = |m: &str| AnalysisError::Format(m.to_string());
        let field = |o: &Value, k: &str| o.get(k).cloned().ok_or_else(|| bad(&format!("missing `{k}`")));
        let as_usize = |o: &Value, k: &str| -> Result<usize, AnalysisError> {
            field(o, k)?.as_u64().map(|x| x as usize).ok_or_else(|| bad(&format!("`{k}` must be a number")))
        };
        let as_str = |o: &Value, k: &str| -> Result<String, AnalysisError> {
            field(o, k)?.as_str().map(str::to_string).ok_or_else(|| bad(&format!("`{k}` must be a string")))
        };
        let domain = DomainKind::parse(&as_str(v, "domain")?).ok_or_else(|| bad("unknown domain"))?;
        let entry: PredKey = as_str(v, "entry")?.parse().map_err(|e: String| bad(&e))?;
        let widen = v.get("widen").and_then(Value::as_u64).map(|x| x as usize);
        let root = as_usize(v, "root")?;
        let mut program_points = Vec::new();
        for p in field(v, "program_points")?.as_array().ok_or_else(|| bad("`program_points` must be a list"))? {
            let s = p.as_str().ok_or_else(|| bad("program points are strings"))?;
            program_points.push(s.parse().map_err(|e: String| bad(&e))?);
        }
        let mut nodes = Vec::new();
        for (i, n) in field(v, "nodes")?.as_array().ok_or_else(|| bad("`nodes` must be a list"))?.iter().enumerate() {
            if as_usize(n, "id")? != i {
                return Err(bad("node ids must be 0, 1, 2, ... in order"));
            }
            let literal = parse_term(&as_str(n, "literal")?).map_err(|e| bad(&e.to_string()))?;
            nodes.push(OrNode {
                id: i,
                pp: as_str(n, "pp")?.parse().map_err(|e: String| bad(&e))?,
                literal,
                call: AbstractSub::from_json(&field(n, "call")?)?,
                success: AbstractSub::from_json(&field(n, "success")?)?,
                and_nodes: Vec::new(),
            });
        }
        let check = |id: usize| if id < nodes.len() { Ok(id) } else { Err(bad("node id out of range")) };
        check(root)?;
        let mut ands: Vec<(usize, AndNode)> = Vec::new();
        for a in field(v, "and_nodes")?.as_array().ok_or_else(|| bad("`and_nodes` must be a list"))? {
            ands.push((
                check(as_usize(a, "or")?)?,
                AndNode {
                    clause: as_usize(a, "clause")?,
                    entry: AbstractSub::from_json(&field(a, "entry")?)?,
                    exit: AbstractSub::from_json(&field(a, "exit")?)?,
                    children: Vec::new(),
                },
            ));
        }
        for e in field(v, "edges")?.as_array().ok_or_else(|| bad("`edges` must be a list"))? {
            let (from, clause) = (check(as_usize(e, "from")?)?, as_usize(e, "clause")?);
            let (lit, to) = (as_usize(e, "literal")?, check(as_usize(e, "to")?)?);
            let slot = ands
                .iter_mut()
                .find(|(o, a)| *o == from && a.clause == clause)
                .ok_or_else(|| bad("edge refers to a missing and-node"))?;
            slot.1.children.push((lit, to));
        }
        for (o, mut a) in ands {
            a.children.sort();
            nodes[o].and_nodes.push(a);
        }
        Ok(AndOrGraph { domain, entry, widen, root, nodes, program_points })
    }
}
