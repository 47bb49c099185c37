use std::collections::{BTreeSet, HashMap, VecDeque};

use super::{check_compatible, MetricError};
use crate::analyzer::{AndNode, AndOrGraph, OrNode};
use crate::domain::{AbstractSub, DomainKind};

fn translate_sub(s: &AbstractSub, base: DomainKind) -> Result<AbstractSub, MetricError> {
    match (s, base) {
        (AbstractSub::Share(sh), DomainKind::Gr) => Ok(AbstractSub::Gr(sh.to_gr())),
        (s, base) if s.kind() == base => Ok(s.clone()),
        (s, base) => Err(MetricError::NoTranslator(s.kind().to_string(), base.to_string())),
    }
}

/// Re-expresses every substitution of `g` in `base`.
pub fn translate_base(g: &AndOrGraph, base: DomainKind) -> Result<AndOrGraph, MetricError> {
    if g.domain == base {
        return Ok(g.clone());
    }
    let mut out = g.clone();
    out.domain = base;
    for n in &mut out.nodes {
        n.call = translate_sub(&n.call, base)?;
        n.success = translate_sub(&n.success, base)?;
        for a in &mut n.and_nodes {
            a.entry = translate_sub(&a.entry, base)?;
            a.exit = translate_sub(&a.exit, base)?;
        }
    }
    Ok(out)
}

fn meet_all<'a>(subs: impl Iterator<Item = &'a AbstractSub>) -> Result<AbstractSub, MetricError> {
    let mut it = subs;
    let mut acc = it.next().expect("at least one graph").clone();
    for s in it {
        acc = acc.meet(s)?;
    }
    Ok(acc)
}

/// Position-wise meet of analyses of the same program and entry. Nodes of
/// the result correspond to tuples of aligned input nodes.
pub fn intersect(graphs: &[AndOrGraph]) -> Result<AndOrGraph, MetricError> {
    let first = graphs.first().ok_or_else(|| MetricError::Incompatible("nothing to intersect".into()))?;
    for g in &graphs[1..] {
        check_compatible(first, g)?;
    }
    let mut index: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut tuples: Vec<Vec<usize>> = Vec::new();
    let mut queue = VecDeque::new();
    let root: Vec<usize> = graphs.iter().map(|g| g.root).collect();
    index.insert(root.clone(), 0);
    tuples.push(root);
    queue.push_back(0);
    let mut nodes: Vec<OrNode> = Vec::new();
    while let Some(i) = queue.pop_front() {
        let members: Vec<&OrNode> = graphs.iter().zip(&tuples[i]).map(|(g, &id)| &g.nodes[id]).collect();
        let clause_sets: Vec<BTreeSet<usize>> =
            members.iter().map(|m| m.and_nodes.iter().map(|a| a.clause).collect()).collect();
        let nonempty: Vec<&BTreeSet<usize>> = clause_sets.iter().filter(|s| !s.is_empty()).collect();
        if nonempty.windows(2).any(|w| w[0] != w[1]) {
            return Err(MetricError::ShapeMismatch(members[0].pp.to_string()));
        }
        let common: BTreeSet<usize> =
            if nonempty.len() == clause_sets.len() { clause_sets[0].clone() } else { BTreeSet::new() };
        let mut and_nodes = Vec::new();
        for c in common {
            let ands: Vec<&AndNode> =
                members.iter().map(|m| m.and_nodes.iter().find(|a| a.clause == c).expect("common clause")).collect();
            let lits: BTreeSet<usize> = ands[0]
                .children
                .iter()
                .map(|&(l, _)| l)
                .filter(|l| ands.iter().all(|a| a.children.iter().any(|(k, _)| k == l)))
                .collect();
            let mut children = Vec::new();
            for l in lits {
                let t: Vec<usize> =
                    ands.iter().map(|a| a.children.iter().find(|(k, _)| *k == l).expect("common literal").1).collect();
                let j = *index.entry(t.clone()).or_insert_with(|| {
                    tuples.push(t);
                    queue.push_back(tuples.len() - 1);
                    tuples.len() - 1
                });
                children.push((l, j));
            }
            and_nodes.push(AndNode {
                clause: c,
                entry: meet_all(ands.iter().map(|a| &a.entry))?,
                exit: meet_all(ands.iter().map(|a| &a.exit))?,
                children,
            });
        }
        nodes.push(OrNode {
            id: i,
            pp: members[0].pp.clone(),
            literal: members[0].literal.clone(),
            call: meet_all(members.iter().map(|m| &m.call))?,
            success: meet_all(members.iter().map(|m| &m.success))?,
            and_nodes,
        });
    }
    Ok(AndOrGraph {
        domain: first.domain,
        entry: first.entry.clone(),
        widen: None,
        root: 0,
        nodes,
        program_points: first.program_points.clone(),
    })
}

/// Number of functor and constant symbols in the rendering of every call
/// and success substitution.
pub fn analysis_size(g: &AndOrGraph) -> usize {
    g.nodes.iter().map(|n| n.call.symbol_count() + n.success.symbol_count()).sum()
}
