//! The import case: peers that only pull data from more trusted neighbors.
//!
//! Classification tags every inter-peer constraint as an import UDEC, an
//! import RDEC or neither. For import systems the neighborhood solution is
//! the least model of a Datalog program computed semi-naively, which gives a
//! unique solution in polynomial time. With local integrity constraints the
//! imported atoms are kept and the peer's own data is repaired.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::dec::{n_rewrite_constraint, Atom, Builtin, Conjunct, Constraint, Term};
use crate::error::{Error, Result};
use crate::nullquery::{builtin_holds, match_atoms, Binding, CAtom, CBuiltin, CTerm, CompiledConstraint, Slots};
use crate::pdes::{inc_marker, Pdes, SolutionResult, Trust};
use crate::relational::{Constant, GroundAtom, Instance, Name};
use crate::repair::{repairs, RepairOptions, DEFAULT_CAP};

/// Tag of a single constraint.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "tag", content = "reason", rename_all = "lowercase")]
pub enum DecTag {
    /// Import UDEC.
    Iudec,
    /// Import RDEC.
    Irdec,
    /// Local integrity constraint.
    Local,
    /// Inter-peer constraint that is not an import constraint.
    General(String),
}

/// Import kind of a peer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PeerKind {
    /// Import constraints only and no local constraints.
    UnrestrictedImport,
    /// Import constraints plus local constraints.
    RestrictedImport,
    /// Anything else.
    General,
}

/// Classification report for one peer.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PeerClassification {
    /// The peer's kind.
    pub kind: PeerKind,
    /// Tags of the peer's constraints, in `Σ(P)` order, rendered with the constraint text.
    pub decs: Vec<(String, DecTag)>,
    /// Reasons for a `general` verdict.
    pub reasons: Vec<String>,
    /// Consequent builtins on universal variables that were folded into rule guards.
    pub folds: Vec<String>,
}

/// Classification of a whole system.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ImportClassification {
    /// Per-peer reports.
    pub peers: BTreeMap<Name, PeerClassification>,
}

impl ImportClassification {
    /// Kind of a peer.
    pub fn kind(&self, p: &str) -> Option<PeerKind> {
        self.peers.get(p).map(|c| c.kind)
    }

    /// True when every listed peer is of the given kinds.
    fn all_of(&self, peers: &BTreeSet<Name>, ok: &[PeerKind]) -> bool {
        peers.iter().all(|p| self.kind(p).is_some_and(|k| ok.contains(&k)))
    }
}

/// Shape check for an import constraint into `p` from `q`.
fn import_tag(c: &Constraint, p_preds: &BTreeSet<Name>, q_preds: &BTreeSet<Name>) -> (DecTag, Option<String>) {
    let general = |m: &str| (DecTag::General(m.to_string()), None);
    if let Some(a) = c.body.iter().find(|a| !q_preds.contains(&a.pred)) {
        return general(&format!("antecedent atom {a} is not over the source peer"));
    }
    let atom_disjuncts: Vec<&Conjunct> = c.atom_disjuncts().collect();
    if atom_disjuncts.len() != 1 {
        return general("the consequent must contain exactly one database-atom disjunct");
    }
    let d = atom_disjuncts[0];
    let atoms: Vec<&Atom> = d.atoms().collect();
    if atoms.len() != 1 {
        return general("the consequent must contain exactly one database atom");
    }
    let a = atoms[0];
    if !p_preds.contains(&a.pred) {
        return general(&format!("consequent atom {a} is not over the importing peer"));
    }
    let body_vars: BTreeSet<&Name> = c.body.iter().flat_map(|b| b.vars()).collect();
    if a.vars().any(|v| !body_vars.contains(v) && !d.exists.contains(v)) {
        return general("the consequent atom uses a variable that is not in the antecedent");
    }
    for b in c.builtin_disjuncts() {
        if b.builtins().flat_map(|x| x.terms()).any(|t| t.as_var().is_some_and(|v| !body_vars.contains(v))) {
            return general("a consequent builtin uses a variable that is not in the antecedent");
        }
    }
    if d.exists.is_empty() {
        if d.builtins().next().is_some() {
            return general("builtins conjoined with the imported atom need existential variables");
        }
        return (DecTag::Iudec, None);
    }
    for z in &d.exists {
        if a.vars().filter(|v| *v == z).count() != 1 {
            return general(&format!("existential {z} must occur exactly once in the imported atom"));
        }
        if d.builtins().any(|b| b.terms().iter().any(|t| t.as_var() == Some(z))) {
            return general(&format!("existential {z} is compared by a builtin and cannot be null"));
        }
    }
    let phi1: Vec<String> = d.builtins().map(|b| b.to_string()).collect();
    let fold = (!phi1.is_empty()).then(|| format!("{} folded into the guard of {c}", phi1.join(", ")));
    (DecTag::Irdec, fold)
}

/// Classify every peer of a system.
pub fn classify(pdes: &Pdes) -> ImportClassification {
    let s = &pdes.schema;
    let mut peers = BTreeMap::new();
    for p in &s.peers {
        let p_preds = s.preds_of(p);
        let mut decs = Vec::new();
        let mut reasons = Vec::new();
        let mut folds = Vec::new();
        let mut has_local = false;
        for (q, c) in s.sigma_of(p) {
            let tag = if q == *p {
                has_local = true;
                DecTag::Local
            } else {
                if s.trust.get(&(p.clone(), q.clone())) != Some(&Trust::Less) {
                    reasons.push(format!("trust toward {q} is not less"));
                }
                let (tag, fold) = import_tag(c, &p_preds, &s.preds_of(&q));
                if let DecTag::General(m) = &tag {
                    reasons.push(format!("{c}: {m}"));
                }
                folds.extend(fold);
                tag
            };
            decs.push((c.to_string(), tag));
        }
        reasons.sort();
        reasons.dedup();
        let kind = if !reasons.is_empty() {
            PeerKind::General
        } else if has_local {
            PeerKind::RestrictedImport
        } else {
            PeerKind::UnrestrictedImport
        };
        peers.insert(p.clone(), PeerClassification { kind, decs, reasons, folds });
    }
    ImportClassification { peers }
}

/// A positive Datalog rule with builtin guards.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DatalogRule {
    /// Head atom; existential positions hold `null`.
    pub head: Atom,
    /// Positive body atoms.
    pub body: Vec<Atom>,
    /// Builtin guards.
    pub guards: Vec<Builtin>,
    /// True when the rule comes from an import RDEC.
    pub from_rdec: bool,
}

impl fmt::Display for DatalogRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let body: Vec<String> =
            self.body.iter().map(|a| a.to_string()).chain(self.guards.iter().map(|g| g.to_string())).collect();
        write!(f, "{} :- {}.", self.head, body.join(", "))
    }
}

/// Facts plus rules.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DatalogProgram {
    /// Extensional facts.
    pub facts: Instance,
    /// Rules.
    pub rules: Vec<DatalogRule>,
}

impl fmt::Display for DatalogProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for a in &self.facts {
            writeln!(f, "{a}.")?;
        }
        for r in &self.rules {
            writeln!(f, "{r}")?;
        }
        Ok(())
    }
}

/// Rules for one import constraint: the null-aware rewriting's builtin
/// disjuncts are negated, and a disjunct that is a conjunction of several
/// builtins splits the rule into one rule per negated conjunct member.
fn rules_for(c: &Constraint) -> Vec<DatalogRule> {
    let rewritten = n_rewrite_constraint(c);
    let d = c.atom_disjuncts().next().expect("import constraint has an atom disjunct");
    let atom = d.atoms().next().expect("one atom").clone();
    let head = Atom {
        pred: atom.pred.clone(),
        terms: atom
            .terms
            .iter()
            .map(|t| match t.as_var() {
                Some(v) if d.exists.contains(v) => Term::Const(Constant::Null),
                _ => t.clone(),
            })
            .collect(),
    };
    let phi1: Vec<Builtin> = d.builtins().cloned().collect();
    let mut choices: Vec<Vec<Builtin>> = vec![phi1];
    for disj in rewritten.builtin_disjuncts() {
        let negs: Vec<Option<Builtin>> = disj.builtins().map(Builtin::negate).collect();
        if negs.iter().any(Option::is_none) && negs.len() == 1 {
            // Negation of `false` is `true`: no guard.
            continue;
        }
        let alts: Vec<Builtin> = negs.into_iter().flatten().collect();
        choices = choices
            .into_iter()
            .flat_map(|g| {
                alts.iter().map(move |b| {
                    let mut g = g.clone();
                    if !g.contains(b) {
                        g.push(b.clone());
                    }
                    g
                })
            })
            .collect();
    }
    choices
        .into_iter()
        .map(|guards| DatalogRule { head: head.clone(), body: c.body.clone(), guards, from_rdec: !d.exists.is_empty() })
        .collect()
}

/// The import program of `p` over the neighborhood instance `dbar`.
pub fn import_program(pdes: &Pdes, p: &str, dbar: &Instance) -> Result<DatalogProgram> {
    let cls = classify(pdes);
    let pc = cls.peers.get(p).ok_or_else(|| Error::Schema(format!("unknown peer {p}")))?;
    if pc.kind == PeerKind::General {
        return Err(Error::Refused(format!("peer {p} is not of the import kind: {}", pc.reasons.join("; "))));
    }
    let mut rules = Vec::new();
    for (q, c) in pdes.schema.sigma_of(p) {
        if q.as_ref() != p && !dbar.contains(&inc_marker(&q)) {
            rules.extend(rules_for(c));
        }
    }
    Ok(DatalogProgram { facts: dbar.clone(), rules })
}

struct CompiledRule {
    head: CAtom,
    body: Vec<CAtom>,
    guards: Vec<CBuiltin>,
    nslots: usize,
    from_rdec: bool,
}

fn compile_rule(r: &DatalogRule) -> CompiledRule {
    let mut slots = Slots::default();
    let body = r.body.iter().map(|a| slots.atom(a)).collect();
    let head = slots.atom(&r.head);
    let guards = r.guards.iter().map(|g| slots.builtin(g)).collect();
    CompiledRule { head, body, guards, nslots: slots.names.len(), from_rdec: r.from_rdec }
}

fn instantiate(a: &CAtom, b: &Binding) -> GroundAtom {
    GroundAtom::from_parts(
        a.pred.clone(),
        a.terms
            .iter()
            .map(|t| match t {
                CTerm::Const(c) => c.clone(),
                CTerm::Slot(i) => b[*i].clone().expect("head variable bound by the body"),
            })
            .collect(),
    )
}

/// Outcome of a least-model computation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LeastModel {
    /// The least model.
    pub model: Instance,
    /// Atoms derived by some rule from an import UDEC.
    pub derived_by_udec: BTreeSet<GroundAtom>,
    /// Atoms derived by some rule from an import RDEC.
    pub derived_by_rdec: BTreeSet<GroundAtom>,
    /// Number of productive rounds.
    pub rounds: usize,
}

/// Semi-naive least model of a Datalog program.
pub fn least_model(prog: &DatalogProgram) -> LeastModel {
    let rules: Vec<CompiledRule> = prog.rules.iter().map(compile_rule).collect();
    let mut model = prog.facts.clone();
    let mut delta = prog.facts.clone();
    let mut by_udec = BTreeSet::new();
    let mut by_rdec = BTreeSet::new();
    let mut rounds = 0;
    loop {
        let mut fresh: BTreeSet<GroundAtom> = BTreeSet::new();
        for r in &rules {
            // Semi-naive: at least one body atom must match a delta atom.
            for i in 0..r.body.len() {
                let mut bind: Binding = vec![None; r.nslots];
                let pivot = std::slice::from_ref(&r.body[i]);
                let others: Vec<CAtom> =
                    r.body.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, a)| a.clone()).collect();
                match_atoms(&delta, pivot, &mut bind, &mut |b| {
                    match_atoms(&model, &others, b, &mut |b2| {
                        if r.guards.iter().all(|g| builtin_holds(g, b2)) {
                            let h = instantiate(&r.head, b2);
                            if r.from_rdec {
                                by_rdec.insert(h.clone());
                            } else {
                                by_udec.insert(h.clone());
                            }
                            if !model.contains(&h) {
                                fresh.insert(h);
                            }
                        }
                        false
                    })
                });
            }
        }
        if fresh.is_empty() {
            return LeastModel { model, derived_by_udec: by_udec, derived_by_rdec: by_rdec, rounds };
        }
        rounds += 1;
        delta = fresh.iter().cloned().collect();
        model.extend(fresh);
    }
}

/// Drop null-padded atoms produced only by import RDEC rules when a strictly
/// more informative atom of the model already satisfies every requirement
/// they could meet.
fn prune_subsumed(lm: &LeastModel, facts: &Instance) -> Instance {
    let removable = |a: &GroundAtom| {
        lm.derived_by_rdec.contains(a) && !lm.derived_by_udec.contains(a) && !facts.contains(a)
    };
    lm.model
        .iter()
        .filter(|a| {
            !removable(a)
                || !lm.model.iter().any(|b| {
                    b != *a
                        && b.pred == a.pred
                        && b.args.len() == a.args.len()
                        && a.args.iter().zip(&b.args).all(|(x, y)| x.is_null() || x == y)
                })
        })
        .cloned()
        .collect()
}

/// Unique solution of `p` in an unrestricted import system.
///
/// Sinks return their own instance; other peers take the least model of the
/// import program over their data and their neighbors' solutions, restricted
/// to their schema.
pub fn import_solve(pdes: &Pdes, p: &str) -> Result<Instance> {
    let s = &pdes.schema;
    let cls = classify(pdes);
    let reach = s.accessible(p)?;
    if !cls.all_of(&reach, &[PeerKind::UnrestrictedImport]) {
        return Err(Error::Refused(refusal(&cls, &reach, &[PeerKind::UnrestrictedImport])));
    }
    let mut memo = BTreeMap::new();
    import_rec(pdes, p, &mut memo)
}

fn refusal(cls: &ImportClassification, reach: &BTreeSet<Name>, ok: &[PeerKind]) -> String {
    let bad: Vec<String> = reach
        .iter()
        .filter_map(|q| {
            let c = &cls.peers[q];
            (!ok.contains(&c.kind)).then(|| {
                let why = if c.reasons.is_empty() { "local constraints present".to_string() } else { c.reasons.join("; ") };
                format!("{q} is {:?} ({why})", c.kind)
            })
        })
        .collect();
    format!("not an unrestricted import system: {}", bad.join(", "))
}

fn import_rec(pdes: &Pdes, p: &str, memo: &mut BTreeMap<Name, Instance>) -> Result<Instance> {
    if let Some(d) = memo.get(p) {
        return Ok(d.clone());
    }
    let s = &pdes.schema;
    let own = pdes.instance.get(p);
    let neighbors = s.strict_neighbors(p)?;
    let result = if neighbors.is_empty() {
        own
    } else {
        let mut dbar = own.clone();
        for q in &neighbors {
            dbar.extend(import_rec(pdes, q, memo)?.iter().cloned());
        }
        let prog = import_program(pdes, p, &dbar)?;
        let lm = least_model(&prog);
        prune_subsumed(&lm, &own).restrict(&s.preds_of(p))
    };
    memo.insert(crate::relational::name(p), result.clone());
    Ok(result)
}

/// Solutions of `p` in a restricted import system: the import fixpoint is
/// computed over the peer's data and its neighbors' cores, then the peer's
/// local constraints are repaired without deleting imported atoms.
pub fn restricted_import_solve(pdes: &Pdes, p: &str) -> Result<SolutionResult> {
    restricted_import_solve_with(pdes, p, DEFAULT_CAP)
}

/// [`restricted_import_solve`] with an explicit candidate cap.
pub fn restricted_import_solve_with(pdes: &Pdes, p: &str, cap: u128) -> Result<SolutionResult> {
    let cls = classify(pdes);
    let reach = pdes.schema.accessible(p)?;
    let ok = [PeerKind::UnrestrictedImport, PeerKind::RestrictedImport];
    if !cls.all_of(&reach, &ok) {
        return Err(Error::Refused(refusal(&cls, &reach, &ok).replace("unrestricted import", "import")));
    }
    let mut memo = BTreeMap::new();
    restricted_rec(pdes, p, cap, &mut memo)
}

fn restricted_rec(pdes: &Pdes, p: &str, cap: u128, memo: &mut BTreeMap<Name, SolutionResult>) -> Result<SolutionResult> {
    if let Some(r) = memo.get(p) {
        return Ok(r.clone());
    }
    let s = &pdes.schema;
    let own_preds = s.preds_of(p);
    let own = pdes.instance.get(p);
    let mut dbar = own.clone();
    for q in s.strict_neighbors(p)? {
        dbar.extend(restricted_rec(pdes, &q, cap, memo)?.core.iter().cloned());
    }
    let prog = import_program(pdes, p, &dbar)?;
    let lm = least_model(&prog);
    let imported = prune_subsumed(&lm, &own).restrict(&own_preds);
    let frozen: BTreeSet<GroundAtom> =
        imported.iter().filter(|a| lm.derived_by_udec.contains(*a) || lm.derived_by_rdec.contains(*a)).cloned().collect();
    let local = s.local_ics(p);
    let mut sols = if local.is_empty() {
        vec![imported]
    } else {
        let opts = RepairOptions { cap, frozen, ..Default::default() };
        repairs(&imported, &local, s.preorder, &opts)?.repairs
    };
    sols.sort();
    sols.dedup();
    let result = if sols.is_empty() {
        SolutionResult { solutions: sols, core: std::iter::once(inc_marker(p)).collect(), inconsistent: true }
    } else {
        let core = sols.iter().skip(1).fold(sols[0].clone(), |acc, d| acc.intersection(d));
        SolutionResult { solutions: sols, core, inconsistent: false }
    };
    memo.insert(crate::relational::name(p), result.clone());
    Ok(result)
}

/// True when `d` null-satisfies every import constraint of `p` together with `neighbors`.
pub fn satisfies_imports(pdes: &Pdes, p: &str, d: &Instance, neighbors: &Instance) -> bool {
    let all = d.union(neighbors);
    pdes.schema
        .sigma_of(p)
        .into_iter()
        .filter(|(q, _)| q.as_ref() != p)
        .all(|(_, c)| CompiledConstraint::new(c).n_holds(&all))
}
