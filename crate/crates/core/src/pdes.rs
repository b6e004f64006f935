//! Peer data exchange systems and the recursive computation of peer
//! solutions, from neighborhood repairs up to peer consistent answers.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::dec::{Constraint, ConjunctiveQuery};
use crate::error::{Error, Result};
use crate::nullquery::{classical_answers, n_answers, AnswerSet};
use crate::relational::{name, GroundAtom, Instance, Name, PredicateSym, Schema};
use crate::repair::{repairs, PreorderKind, RepairOptions, DEFAULT_CAP};

/// Trust of a peer in another peer's data relative to its own.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Trust {
    /// The other peer is trusted more: its data is never changed.
    Less,
    /// Both peers' data may change.
    Same,
}

impl fmt::Display for Trust {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Trust::Less => "less",
            Trust::Same => "same",
        })
    }
}

/// Name of the marker atom signalling that `peer` has no solutions.
pub fn inc_marker(peer: &str) -> GroundAtom {
    GroundAtom::from_parts(name(&format!("inc_{peer}")), Vec::new())
}

/// Schema of a peer data exchange system.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PdesSchema {
    /// Peers in name order.
    pub peers: BTreeSet<Name>,
    /// Schema of each peer.
    pub schemas: BTreeMap<Name, Schema>,
    /// Constraint sets `Σ(P,Q)`.
    pub sigma: BTreeMap<(Name, Name), Vec<Constraint>>,
    /// Trust triples, keyed by `(P,Q)`.
    pub trust: BTreeMap<(Name, Name), Trust>,
    /// Preorder used for neighborhood solutions.
    pub preorder: PreorderKind,
    owner: BTreeMap<Name, Name>,
}

/// One instance per peer.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PdesInstance {
    /// Instance of each peer.
    pub per_peer: BTreeMap<Name, Instance>,
}

impl PdesInstance {
    /// Instance of a peer (empty when absent).
    pub fn get(&self, p: &str) -> Instance {
        self.per_peer.get(p).cloned().unwrap_or_default()
    }
}

/// A complete system: schema, instance and named queries from a definition file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pdes {
    /// The schema.
    pub schema: PdesSchema,
    /// The instance.
    pub instance: PdesInstance,
    /// Queries declared in the definition, with the peer they are posed to.
    pub queries: Vec<(Name, ConjunctiveQuery)>,
}

/// Edge of the accessibility graph.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct AccessEdge {
    /// Source peer (owner of the constraints).
    pub from: Name,
    /// Target peer.
    pub to: Name,
    /// Trust label.
    pub trust: Trust,
}

/// The accessibility graph: an edge `P → Q` for every nonempty `Σ(P,Q)`, `P ≠ Q`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AccessGraph {
    /// Vertices.
    pub peers: Vec<Name>,
    /// Labelled edges.
    pub edges: Vec<AccessEdge>,
}

impl PdesSchema {
    /// Peer owning a predicate.
    pub fn owner_of(&self, pred: &str) -> Option<&Name> {
        self.owner.get(pred)
    }

    fn check_peer(&self, p: &str) -> Result<()> {
        if self.peers.contains(p) {
            Ok(())
        } else {
            Err(Error::Schema(format!("unknown peer {p}")))
        }
    }

    /// Predicates of a peer.
    pub fn preds_of(&self, p: &str) -> BTreeSet<Name> {
        self.schemas.get(p).map(Schema::names).unwrap_or_default()
    }

    /// The accessibility graph.
    pub fn access_graph(&self) -> AccessGraph {
        let edges = self
            .sigma
            .iter()
            .filter(|((p, q), s)| p != q && !s.is_empty())
            .map(|((p, q), _)| AccessEdge {
                from: p.clone(),
                to: q.clone(),
                trust: self.trust.get(&(p.clone(), q.clone())).copied().unwrap_or(Trust::Same),
            })
            .collect();
        AccessGraph { peers: self.peers.iter().cloned().collect(), edges }
    }

    /// `N°(P)`: peers `Q ≠ P` with a nonempty `Σ(P,Q)`.
    pub fn strict_neighbors(&self, p: &str) -> Result<BTreeSet<Name>> {
        self.check_peer(p)?;
        Ok(self
            .sigma
            .iter()
            .filter(|((a, b), s)| a.as_ref() == p && b.as_ref() != p && !s.is_empty())
            .map(|((_, b), _)| b.clone())
            .collect())
    }

    /// `N(P) = N°(P) ∪ {P}`.
    pub fn neighbors(&self, p: &str) -> Result<BTreeSet<Name>> {
        let mut n = self.strict_neighbors(p)?;
        n.insert(name(p));
        Ok(n)
    }

    /// `AC(P)`: peers reachable from `P` in the accessibility graph, plus `P`.
    pub fn accessible(&self, p: &str) -> Result<BTreeSet<Name>> {
        self.check_peer(p)?;
        let mut seen = BTreeSet::from([name(p)]);
        let mut todo = vec![name(p)];
        while let Some(x) = todo.pop() {
            for q in self.strict_neighbors(&x)? {
                if seen.insert(q.clone()) {
                    todo.push(q);
                }
            }
        }
        Ok(seen)
    }

    /// `Σ(P)`: all constraints owned by `P`, grouped by target peer.
    pub fn sigma_of(&self, p: &str) -> Vec<(Name, &Constraint)> {
        self.sigma
            .iter()
            .filter(|((a, _), _)| a.as_ref() == p)
            .flat_map(|((_, b), s)| s.iter().map(move |c| (b.clone(), c)))
            .collect()
    }

    /// Local integrity constraints `Σ(P,P)`.
    pub fn local_ics(&self, p: &str) -> Vec<Constraint> {
        self.sigma.get(&(name(p), name(p))).cloned().unwrap_or_default()
    }

    /// Predicates of the neighborhood schema `S(N(P))`.
    pub fn neighborhood_preds(&self, p: &str) -> Result<BTreeSet<Name>> {
        Ok(self.neighbors(p)?.iter().flat_map(|q| self.preds_of(q)).collect())
    }

    /// Predicates whose data `P` may not change: those of peers `Q` with `(P,less,Q)`.
    pub fn fixed_preds(&self, p: &str) -> BTreeSet<Name> {
        self.trust
            .iter()
            .filter(|((a, b), t)| a.as_ref() == p && b.as_ref() != p && **t == Trust::Less)
            .flat_map(|((_, b), _)| self.preds_of(b))
            .collect()
    }

    /// A cycle of the accessibility graph, if any.
    pub fn find_cycle(&self) -> Option<Vec<Name>> {
        let g = self.access_graph();
        let mut adj: BTreeMap<&Name, Vec<&Name>> = BTreeMap::new();
        for e in &g.edges {
            adj.entry(&e.from).or_default().push(&e.to);
        }
        // 0 = unvisited, 1 = on stack, 2 = done
        let mut state: BTreeMap<&Name, u8> = BTreeMap::new();
        fn dfs<'a>(
            v: &'a Name,
            adj: &BTreeMap<&'a Name, Vec<&'a Name>>,
            state: &mut BTreeMap<&'a Name, u8>,
            stack: &mut Vec<&'a Name>,
        ) -> Option<Vec<Name>> {
            state.insert(v, 1);
            stack.push(v);
            for w in adj.get(v).into_iter().flatten() {
                match state.get(w).copied().unwrap_or(0) {
                    1 => {
                        let start = stack.iter().position(|x| x == w).expect("on stack");
                        let mut cyc: Vec<Name> = stack[start..].iter().map(|x| (*x).clone()).collect();
                        cyc.push((*w).clone());
                        return Some(cyc);
                    }
                    0 => {
                        if let Some(c) = dfs(w, adj, state, stack) {
                            return Some(c);
                        }
                    }
                    _ => {}
                }
            }
            stack.pop();
            state.insert(v, 2);
            None
        }
        for p in &g.peers {
            if state.get(p).copied().unwrap_or(0) == 0 {
                let mut stack = Vec::new();
                if let Some(c) = dfs(p, &adj, &mut state, &mut stack) {
                    return Some(c);
                }
            }
        }
        None
    }
}

/// Incremental construction of a [`Pdes`] with validation in [`PdesBuilder::build`].
#[derive(Clone, Debug, Default)]
pub struct PdesBuilder {
    peers: Vec<(Name, Vec<(Name, usize)>)>,
    trust: Vec<(Name, Trust, Name)>,
    decs: Vec<Constraint>,
    facts: Vec<(Name, GroundAtom)>,
    queries: Vec<(Name, ConjunctiveQuery)>,
    preorder: PreorderKind,
}

impl PdesBuilder {
    /// Empty builder.
    pub fn new() -> PdesBuilder {
        PdesBuilder::default()
    }

    /// Declare a peer and its predicates with arities.
    pub fn peer(&mut self, p: &str, preds: &[(&str, usize)]) -> &mut Self {
        self.peers.push((name(p), preds.iter().map(|(n, a)| (name(n), *a)).collect()));
        self
    }

    /// Declare a trust triple `(p, t, q)`.
    pub fn trust(&mut self, p: &str, t: Trust, q: &str) -> &mut Self {
        self.trust.push((name(p), t, name(q)));
        self
    }

    /// Add a constraint to `Σ(p,q)`.
    pub fn dec(&mut self, p: &str, q: &str, text: &str) -> Result<&mut Self> {
        let mut c = Constraint::parse(text)?;
        c.owner = Some((name(p), name(q)));
        self.decs.push(c);
        Ok(self)
    }

    /// Add an already built constraint; its owner must be set.
    pub fn constraint(&mut self, c: Constraint) -> &mut Self {
        self.decs.push(c);
        self
    }

    /// Add atoms to a peer's instance.
    pub fn facts(&mut self, p: &str, atoms: &Instance) -> &mut Self {
        for a in atoms {
            self.facts.push((name(p), a.clone()));
        }
        self
    }

    /// Add a named query.
    pub fn query(&mut self, p: &str, q: ConjunctiveQuery) -> &mut Self {
        self.queries.push((name(p), q));
        self
    }

    /// Select the preorder.
    pub fn preorder(&mut self, k: PreorderKind) -> &mut Self {
        self.preorder = k;
        self
    }

    /// Validate and build. A cyclic accessibility graph is refused with a witness.
    pub fn build(&self) -> Result<Pdes> {
        let mut peers = BTreeSet::new();
        let mut schemas = BTreeMap::new();
        let mut owner = BTreeMap::new();
        for (p, preds) in &self.peers {
            if !peers.insert(p.clone()) {
                return Err(Error::Schema(format!("peer {p} declared twice")));
            }
            let mut s = Schema::new();
            for (r, arity) in preds {
                if r.as_ref() == "null" {
                    return Err(Error::Schema("null is reserved and cannot name a predicate".into()));
                }
                if let Some(o) = owner.insert(r.clone(), p.clone()) {
                    return Err(Error::Schema(format!("predicate {r} belongs to both {o} and {p}")));
                }
                s.declare(PredicateSym { name: r.clone(), arity: *arity, owner: Some(p.clone()) })?;
            }
            schemas.insert(p.clone(), s);
        }
        let lookup = |r: &Name| -> Result<(Name, usize)> {
            let o = owner.get(r).ok_or_else(|| Error::Schema(format!("unknown predicate {r}")))?;
            let arity = schemas[o].get(r).map(|s: &PredicateSym| s.arity).unwrap_or(0);
            Ok((o.clone(), arity))
        };
        let mut sigma: BTreeMap<(Name, Name), Vec<Constraint>> = BTreeMap::new();
        for c in &self.decs {
            let (p, q) = c.owner.clone().ok_or_else(|| Error::Schema("constraint without owner".into()))?;
            for x in [&p, &q] {
                if !peers.contains(x) {
                    return Err(Error::Schema(format!("unknown peer {x} in dec")));
                }
            }
            let atoms = c.body.iter().chain(c.head.iter().flat_map(|d| d.atoms()));
            for a in atoms {
                let (o, arity) = lookup(&a.pred)?;
                if o != p && o != q {
                    return Err(Error::Schema(format!(
                        "predicate {} of peer {o} cannot appear in a constraint between {p} and {q}",
                        a.pred
                    )));
                }
                if arity != a.terms.len() {
                    return Err(Error::Schema(format!("{} has arity {arity}, used with {}", a.pred, a.terms.len())));
                }
            }
            sigma.entry((p, q)).or_default().push(c.clone());
        }
        let mut trust = BTreeMap::new();
        for (p, t, q) in &self.trust {
            for x in [p, q] {
                if !peers.contains(x) {
                    return Err(Error::Schema(format!("unknown peer {x} in trust")));
                }
            }
            if p == q && *t != Trust::Same {
                return Err(Error::Schema(format!("a peer trusts itself as same, not {t} ({p})")));
            }
            if trust.insert((p.clone(), q.clone()), *t).is_some() {
                return Err(Error::Schema(format!("more than one trust triple for ({p},{q})")));
            }
        }
        for (p, q) in sigma.keys() {
            if p == q {
                trust.entry((p.clone(), q.clone())).or_insert(Trust::Same);
            } else if !trust.contains_key(&(p.clone(), q.clone())) {
                return Err(Error::Schema(format!("constraints from {p} to {q} need a trust triple")));
            }
        }
        let mut per_peer: BTreeMap<Name, Instance> = peers.iter().map(|p| (p.clone(), Instance::new())).collect();
        for (p, a) in &self.facts {
            let s = schemas.get(p).ok_or_else(|| Error::Schema(format!("unknown peer {p} in instance")))?;
            s.check_atom(a).map_err(|e| match e {
                Error::Schema(m) => Error::Schema(format!("{m} (instance of {p})")),
                other => other,
            })?;
            per_peer.get_mut(p).expect("peer present").insert(a.clone());
        }
        for (p, q) in &self.queries {
            if !peers.contains(p) {
                return Err(Error::Schema(format!("query posed to unknown peer {p}")));
            }
            for a in q.atoms() {
                let (o, arity) = lookup(&a.pred)?;
                if &o != p || arity != a.terms.len() {
                    return Err(Error::Schema(format!("query atom {a} is not over the schema of {p}")));
                }
            }
        }
        let schema = PdesSchema { peers, schemas, sigma, trust, preorder: self.preorder, owner };
        if let Some(cycle) = schema.find_cycle() {
            let w: Vec<&str> = cycle.iter().map(|n| n.as_ref()).collect();
            return Err(Error::Refused(format!("accessibility graph is cyclic: {}", w.join(" -> "))));
        }
        Ok(Pdes { schema, instance: PdesInstance { per_peer }, queries: self.queries.clone() })
    }
}

/// Evaluation settings.
#[derive(Clone, Debug)]
pub struct Config {
    /// Preorder; `None` uses the one declared by the schema.
    pub preorder: Option<PreorderKind>,
    /// Candidate cap for repairs.
    pub cap: u128,
    /// Restrict neighbor cores to the predicates mentioned in `Σ(P,Q)`.
    pub restrict_cores: bool,
}

impl Default for Config {
    fn default() -> Self {
        Config { preorder: None, cap: DEFAULT_CAP, restrict_cores: false }
    }
}

/// Solutions of a peer.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SolutionResult {
    /// Solutions over the peer's schema, canonically ordered.
    pub solutions: Vec<Instance>,
    /// Intersection of the solutions, or `{inc_P}` when there is none.
    pub core: Instance,
    /// True when there is no solution.
    pub inconsistent: bool,
}

/// Peer consistent answers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Pca {
    /// Answers true in every solution.
    Answers(AnswerSet),
    /// The peer has no solutions; the only answer is its `inc` marker.
    Inconsistent(GroundAtom),
}

impl Pca {
    /// Rendered answers (`inc_P` for an inconsistent peer).
    pub fn render(&self) -> Vec<String> {
        match self {
            Pca::Answers(a) => a.render(),
            Pca::Inconsistent(m) => vec![m.to_string()],
        }
    }
}

fn intersect_all(items: &[Instance]) -> Instance {
    let mut it = items.iter();
    match it.next() {
        None => Instance::new(),
        Some(first) => it.fold(first.clone(), |acc, d| acc.intersection(d)),
    }
}

/// Recursive evaluator of the peer semantics; memoizes per-peer results.
pub struct Solver<'a> {
    pdes: &'a Pdes,
    cfg: Config,
    memo: RefCell<BTreeMap<Name, SolutionResult>>,
}

impl<'a> Solver<'a> {
    /// New solver over a system.
    pub fn new(pdes: &'a Pdes, cfg: Config) -> Solver<'a> {
        Solver { pdes, cfg, memo: RefCell::new(BTreeMap::new()) }
    }

    /// Active preorder.
    pub fn preorder(&self) -> PreorderKind {
        self.cfg.preorder.unwrap_or(self.pdes.schema.preorder)
    }

    fn schema(&self) -> &PdesSchema {
        &self.pdes.schema
    }

    /// Neighborhood solutions of `p` for a neighborhood instance `dbar`.
    /// Constraints toward a peer whose `inc` marker is in `dbar` count as satisfied.
    pub fn neighborhood_solutions(&self, p: &str, dbar: &Instance) -> Result<Vec<Instance>> {
        let s = self.schema();
        let neighborhood = s.neighbors(p)?;
        let sigma: Vec<Constraint> = s
            .sigma_of(p)
            .into_iter()
            .filter(|(q, _)| neighborhood.contains(q) && !dbar.contains(&inc_marker(q)))
            .map(|(_, c)| c.clone())
            .collect();
        let opts = RepairOptions { cap: self.cfg.cap, fixed: s.fixed_preds(p), ..Default::default() };
        Ok(repairs(dbar, &sigma, self.preorder(), &opts)?.repairs)
    }

    /// Local core: the intersection of the neighborhood solutions restricted to `S(P)`,
    /// or `{inc_P}` when there is none.
    pub fn local_core(&self, p: &str, dbar: &Instance) -> Result<Instance> {
        let ns = self.neighborhood_solutions(p, dbar)?;
        if ns.is_empty() {
            return Ok(std::iter::once(inc_marker(p)).collect());
        }
        Ok(intersect_all(&ns).restrict(&self.schema().preds_of(p)))
    }

    /// Neighborhood instance `D(P) ∪ ⋃ Core(Q)` over the strict neighbors.
    pub fn neighborhood_instance(&self, p: &str) -> Result<Instance> {
        let s = self.schema();
        let mut dbar = self.pdes.instance.get(p);
        for q in s.strict_neighbors(p)? {
            let core = self.solutions(&q)?.core;
            if self.cfg.restrict_cores && !core.contains(&inc_marker(&q)) {
                let used: BTreeSet<Name> =
                    s.sigma.get(&(name(p), q.clone())).into_iter().flatten().flat_map(|c| c.predicates()).collect();
                dbar.extend(core.restrict(&used).iter().cloned());
            } else {
                dbar.extend(core.iter().cloned());
            }
        }
        Ok(dbar)
    }

    /// Solutions of `p`, computed recursively over the accessibility graph.
    pub fn solutions(&self, p: &str) -> Result<SolutionResult> {
        if let Some(r) = self.memo.borrow().get(p) {
            return Ok(r.clone());
        }
        let s = self.schema();
        s.check_peer(p)?;
        let own = s.preds_of(p);
        let sols: Vec<Instance> = if s.sigma_of(p).is_empty() {
            vec![self.pdes.instance.get(p)]
        } else {
            let dbar = if s.strict_neighbors(p)?.is_empty() {
                self.pdes.instance.get(p)
            } else {
                self.neighborhood_instance(p)?
            };
            let mut out: Vec<Instance> =
                self.neighborhood_solutions(p, &dbar)?.iter().map(|d| d.restrict(&own)).collect();
            out.sort();
            out.dedup();
            out
        };
        let result = if sols.is_empty() {
            SolutionResult { solutions: sols, core: std::iter::once(inc_marker(p)).collect(), inconsistent: true }
        } else {
            SolutionResult { core: intersect_all(&sols), solutions: sols, inconsistent: false }
        };
        self.memo.borrow_mut().insert(name(p), result.clone());
        Ok(result)
    }

    /// Core of `p`.
    pub fn core(&self, p: &str) -> Result<Instance> {
        Ok(self.solutions(p)?.core)
    }

    /// Peer consistent answers to `q` at `p`.
    pub fn pca(&self, p: &str, q: &ConjunctiveQuery) -> Result<Pca> {
        let r = self.solutions(p)?;
        if r.inconsistent {
            return Ok(Pca::Inconsistent(inc_marker(p)));
        }
        let eval = |d: &Instance| match self.preorder() {
            PreorderKind::NullBased => n_answers(d, q),
            PreorderKind::SymmetricDelta => classical_answers(d, q),
        };
        let mut it = r.solutions.iter();
        let first = eval(it.next().expect("nonempty"));
        Ok(Pca::Answers(it.fold(first, |acc: AnswerSet, d| acc.intersect(&eval(d)))))
    }
}

impl Pdes {
    /// Parse a definition file.
    pub fn parse(text: &str) -> Result<Pdes> {
        crate::defs::parse_definition(text)
    }

    /// Solver with default configuration.
    pub fn solver(&self) -> Solver<'_> {
        Solver::new(self, Config::default())
    }

    /// Solver with an explicit configuration.
    pub fn solver_with(&self, cfg: Config) -> Solver<'_> {
        Solver::new(self, cfg)
    }
}
