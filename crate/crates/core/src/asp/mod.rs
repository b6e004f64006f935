//! Answer-set computation of peer solutions.
//!
//! A peer's solution program is generated from its constraints, trust
//! relationships and neighborhood instance ([`build_solution_program`]),
//! grounded ([`ground`]), and its stable models are enumerated
//! ([`stable_models`]). Each model determines an instance of the peer
//! ([`extract_instance`]). Neighbor cores are computed the same way,
//! recursively along the accessibility graph.

mod emit;
mod ground;
mod program;
mod solve;

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

pub use emit::{emit_text, parse_program, rule_text, Disjunction};
pub use ground::{ground, ground_relevant, simplify, GAtom, GroundProgram, GroundRule};
pub use program::{
    add_query_rule, build_solution_program, Annotation, BodyLit, LogicProgram, PAtom, Rule, RuleKind, ANS, DOM,
};
pub use solve::{stable_models, StableModel};

use crate::dec::ConjunctiveQuery;
use crate::error::Result;
use crate::nullquery::AnswerSet;
use crate::pdes::{inc_marker, Config, Pca, Pdes, SolutionResult};
use crate::relational::{name, Constant, Instance, Name};
use crate::repair::{PreorderKind, DEFAULT_CAP};

/// The instance `D_M = {R(ā) | R ∈ preds, R_(ā,tss) ∈ M}`.
pub fn extract_instance(m: &StableModel, preds: &BTreeSet<Name>) -> Instance {
    m.atoms
        .iter()
        .filter(|a| a.ann == Some(Annotation::TStarStar) && preds.contains(&a.pred))
        .map(GAtom::base)
        .collect()
}

/// The updated neighborhood instance encoded by a model: atoms of changeable
/// predicates that are true (`ts`) and not deleted (`fa`), plus the unchanged
/// atoms of the fixed predicates taken from `dbar`.
pub fn neighborhood_update(
    m: &StableModel,
    dbar: &Instance,
    changeable: &BTreeSet<Name>,
    fixed: &BTreeSet<Name>,
) -> Instance {
    let mut out: Instance = m
        .atoms
        .iter()
        .filter(|a| a.ann == Some(Annotation::TStar) && changeable.contains(&a.pred))
        .filter(|a| !m.contains(&GAtom { pred: a.pred.clone(), args: a.args.clone(), ann: Some(Annotation::Fa) }))
        .map(GAtom::base)
        .collect();
    out.extend(dbar.iter().filter(|a| fixed.contains(&a.pred)).cloned());
    out
}

/// Settings of the answer-set evaluation.
#[derive(Clone, Debug)]
pub struct AspOptions {
    /// Cap on ground instantiations and on search nodes.
    pub cap: u128,
    /// Discard models whose neighborhood update is not a minimal repair.
    pub post_filter: bool,
}

impl Default for AspOptions {
    fn default() -> Self {
        AspOptions { cap: DEFAULT_CAP, post_filter: false }
    }
}

/// Outcome of solving one peer's program.
#[derive(Clone, Debug, Serialize)]
pub struct PeerModels {
    /// The peer.
    pub peer: Name,
    /// Its neighborhood instance (own data plus neighbor cores).
    pub dbar: Instance,
    /// Stable models of the solution program.
    pub models: Vec<StableModel>,
    /// The instance `D_M` of each model.
    pub instances: Vec<Instance>,
    /// Whether each model passed the post-filter (all true when it is disabled).
    pub accepted: Vec<bool>,
    /// Distinct instances of the accepted models in canonical order.
    pub solutions: Vec<Instance>,
    /// Number of ground rules and facts after grounding.
    pub ground_size: usize,
    /// Generation warnings.
    pub warnings: Vec<String>,
    #[serde(skip)]
    program: LogicProgram,
}

impl PeerModels {
    /// The solution program.
    pub fn program(&self) -> &LogicProgram {
        &self.program
    }
}

/// Recursive answer-set evaluator of peer solutions; memoizes per-peer solutions.
pub struct AspSolver<'a> {
    pdes: &'a Pdes,
    opts: AspOptions,
    memo: RefCell<BTreeMap<Name, Vec<Instance>>>,
}

impl<'a> AspSolver<'a> {
    /// New evaluator.
    pub fn new(pdes: &'a Pdes, opts: AspOptions) -> AspSolver<'a> {
        AspSolver { pdes, opts, memo: RefCell::new(BTreeMap::new()) }
    }

    /// Core of `q` as used by its neighbors: the intersection of its solutions,
    /// or `{inc_Q}` when there is none.
    pub fn core(&self, q: &str) -> Result<Instance> {
        let sols = self.solutions(q)?;
        Ok(match sols.split_first() {
            None => std::iter::once(inc_marker(q)).collect(),
            Some((first, rest)) => rest.iter().fold(first.clone(), |acc, d| acc.intersection(d)),
        })
    }

    /// `D(P)` together with the cores of the strict neighbors of `p`.
    pub fn neighborhood_instance(&self, p: &str) -> Result<Instance> {
        let mut dbar = self.pdes.instance.get(p);
        for q in self.pdes.schema.strict_neighbors(p)? {
            dbar.extend(self.core(&q)?.iter().cloned());
        }
        Ok(dbar)
    }

    /// Solutions of `p` in canonical order.
    pub fn solutions(&self, p: &str) -> Result<Vec<Instance>> {
        if let Some(s) = self.memo.borrow().get(p) {
            return Ok(s.clone());
        }
        let sols = self.run(p, None)?.solutions;
        self.memo.borrow_mut().insert(name(p), sols.clone());
        Ok(sols)
    }

    /// Solutions, core and consistency flag of `p`.
    pub fn solution_result(&self, p: &str) -> Result<SolutionResult> {
        let solutions = self.solutions(p)?;
        let inconsistent = solutions.is_empty();
        Ok(SolutionResult { core: self.core(p)?, solutions, inconsistent })
    }

    /// Generate, ground and solve the solution program of `p`, with an optional query rule.
    pub fn run(&self, p: &str, query: Option<&ConjunctiveQuery>) -> Result<PeerModels> {
        let s = &self.pdes.schema;
        let dbar = self.neighborhood_instance(p)?;
        let mut program = build_solution_program(self.pdes, p, &dbar)?;
        if let Some(q) = query {
            add_query_rule(&mut program, self.pdes, p, q)?;
        }
        let g = ground_relevant(&program, self.opts.cap)?;
        let ground_size = g.len();
        let models = stable_models(&g, self.opts.cap)?;
        let own = s.preds_of(p);
        let instances: Vec<Instance> = models.iter().map(|m| extract_instance(m, &own)).collect();
        let accepted = if self.opts.post_filter {
            let npreds = s.neighborhood_preds(p)?;
            let fixed: BTreeSet<Name> = s.fixed_preds(p).intersection(&npreds).cloned().collect();
            let changeable: BTreeSet<Name> = npreds.difference(&fixed).cloned().collect();
            let cfg = Config { preorder: Some(PreorderKind::NullBased), cap: self.opts.cap, restrict_cores: false };
            let minimal: BTreeSet<Instance> = self
                .pdes
                .solver_with(cfg)
                .neighborhood_solutions(p, &dbar)?
                .into_iter()
                .map(|d| d.restrict(&npreds))
                .collect();
            models
                .iter()
                .map(|m| minimal.contains(&neighborhood_update(m, &dbar, &changeable, &fixed)))
                .collect()
        } else {
            vec![true; models.len()]
        };
        let mut solutions: Vec<Instance> =
            instances.iter().zip(&accepted).filter(|(_, ok)| **ok).map(|(d, _)| d.clone()).collect();
        solutions.sort();
        solutions.dedup();
        let warnings = program.warnings.clone();
        Ok(PeerModels { peer: name(p), dbar, models, instances, accepted, solutions, ground_size, warnings, program })
    }

    /// Peer consistent answers through a query program: the `ans` atoms common
    /// to all accepted stable models.
    pub fn pca(&self, p: &str, q: &ConjunctiveQuery) -> Result<Pca> {
        let run = self.run(p, Some(q))?;
        let accepted = run.models.iter().zip(&run.accepted).filter(|(_, ok)| **ok).map(|(m, _)| m);
        Ok(cautious_answers(accepted, p, q))
    }
}

/// Peer consistent answers of `q` at `p` computed with the query program over
/// the given neighborhood instance.
pub fn pca_via_asp(pdes: &Pdes, p: &str, dbar: &Instance, q: &ConjunctiveQuery, cap: u128) -> Result<Pca> {
    let mut program = build_solution_program(pdes, p, dbar)?;
    add_query_rule(&mut program, pdes, p, q)?;
    let models = stable_models(&ground_relevant(&program, cap)?, cap)?;
    Ok(cautious_answers(models.iter(), p, q))
}

/// Tuples of the `ans` atoms common to all models, or the `inc` marker of `p` without models.
fn cautious_answers<'m>(models: impl Iterator<Item = &'m StableModel>, p: &str, q: &ConjunctiveQuery) -> Pca {
    let ans = name(ANS);
    let mut common: Option<BTreeSet<Vec<Constant>>> = None;
    for m in models {
        let tuples: BTreeSet<Vec<Constant>> =
            m.atoms.iter().filter(|a| a.pred == ans && a.ann.is_none()).map(|a| a.args.clone()).collect();
        common = Some(match common {
            None => tuples,
            Some(c) => c.intersection(&tuples).cloned().collect(),
        });
    }
    match common {
        None => Pca::Inconsistent(inc_marker(p)),
        Some(t) => Pca::Answers(AnswerSet::for_query(q, t)),
    }
}
