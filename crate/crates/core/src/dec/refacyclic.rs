//! Ref-acyclicity: the predicate dependency graph of a constraint set must not
//! contain a cycle through an edge contributed by an existential constraint.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use super::Constraint;
use crate::relational::Name;

/// Outcome of the ref-acyclicity test.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RefAcyclicity {
    /// True when no cycle contains a marked edge.
    pub acyclic: bool,
    /// A witness cycle as a predicate sequence `p0 → p1 → ... → p0` when not acyclic.
    pub cycle: Vec<Name>,
}

/// Build the dependency graph (edge from every antecedent predicate to every
/// consequent predicate, marked when the constraint has existentials) and
/// look for a cycle through a marked edge.
pub fn ref_acyclic<'a>(sigma: impl IntoIterator<Item = &'a Constraint>) -> RefAcyclicity {
    let mut edges: BTreeMap<Name, BTreeSet<Name>> = BTreeMap::new();
    let mut marked: BTreeSet<(Name, Name)> = BTreeSet::new();
    for c in sigma {
        let existential = c.is_existential();
        for b in &c.body {
            for d in &c.head {
                for h in d.atoms() {
                    edges.entry(b.pred.clone()).or_default().insert(h.pred.clone());
                    if existential {
                        marked.insert((b.pred.clone(), h.pred.clone()));
                    }
                }
            }
        }
    }
    for (u, v) in &marked {
        if let Some(path) = path(&edges, v, u) {
            let mut cycle = vec![u.clone()];
            cycle.extend(path);
            return RefAcyclicity { acyclic: false, cycle };
        }
    }
    RefAcyclicity { acyclic: true, cycle: Vec::new() }
}

/// Shortest path from `from` to `to` (inclusive of both ends), by breadth-first search.
fn path(edges: &BTreeMap<Name, BTreeSet<Name>>, from: &Name, to: &Name) -> Option<Vec<Name>> {
    let mut prev: BTreeMap<Name, Name> = BTreeMap::new();
    let mut queue = VecDeque::from([from.clone()]);
    let mut seen = BTreeSet::from([from.clone()]);
    while let Some(n) = queue.pop_front() {
        if n == *to {
            let mut out = vec![n.clone()];
            let mut cur = n;
            while let Some(p) = prev.get(&cur) {
                out.push(p.clone());
                cur = p.clone();
            }
            out.reverse();
            return Some(out);
        }
        for m in edges.get(&n).into_iter().flatten() {
            if seen.insert(m.clone()) {
                prev.insert(m.clone(), n.clone());
                queue.push_back(m.clone());
            }
        }
    }
    None
}
