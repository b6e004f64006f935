//! Repairs: the information order on tuples, the null-aware closeness
//! preorder, null-based repair enumeration bounded by the restricted chase,
//! and the symmetric-difference alternative.

use std::collections::{BTreeSet, HashSet};

use serde::Serialize;

use crate::chase::{r_chase, split_sigma, SigmaSplit};
use crate::dec::Constraint;
use crate::error::{Error, Result};
use crate::nullquery::{working_universe, Binding, CConstraint, CTerm, CompiledConstraint};
use crate::relational::{Constant, GroundAtom, Instance, Name};

/// Default cap on the number of candidate instances (or search nodes).
pub const DEFAULT_CAP: u128 = 1 << 22;

/// Which closeness relation selects the minimal consistent instances.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PreorderKind {
    /// Information-aware preorder bounded by the restricted chase.
    #[default]
    #[serde(rename = "null")]
    NullBased,
    /// Set inclusion of symmetric differences.
    #[serde(rename = "delta")]
    SymmetricDelta,
}

impl std::str::FromStr for PreorderKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "null" => Ok(PreorderKind::NullBased),
            "delta" => Ok(PreorderKind::SymmetricDelta),
            other => Err(Error::Refused(format!("unknown preorder {other:?}; expected null or delta"))),
        }
    }
}

/// Satisfaction relation used by the symmetric-difference search.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Satisfaction {
    /// Null-aware satisfaction (coincides with classical on null-free data).
    #[default]
    Null,
    /// Classical satisfaction with `null` as an ordinary constant.
    Classical,
}

/// Options shared by the repair procedures.
#[derive(Clone, Debug)]
pub struct RepairOptions {
    /// Cap on candidates (null-based) or search nodes (symmetric difference).
    pub cap: u128,
    /// Predicates whose atoms may not change.
    pub fixed: BTreeSet<Name>,
    /// Satisfaction relation for the symmetric-difference search.
    pub satisfaction: Satisfaction,
    /// Individual base atoms that may not be deleted.
    pub frozen: BTreeSet<GroundAtom>,
}

impl Default for RepairOptions {
    fn default() -> Self {
        RepairOptions { cap: DEFAULT_CAP, fixed: BTreeSet::new(), satisfaction: Satisfaction::Null, frozen: BTreeSet::new() }
    }
}

/// Repairs of a base instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RepairSet {
    /// Repairs sorted by size of the difference to the base, then canonically.
    pub repairs: Vec<Instance>,
    /// The base instance.
    pub base: Instance,
    /// The constraints.
    pub sigma: Vec<Constraint>,
}

/// `c ⊑ d`: `c` is null or equal to `d`.
pub fn info_leq_const(c: &Constant, d: &Constant) -> bool {
    c.is_null() || c == d
}

/// Pointwise information order on tuples.
pub fn info_leq(c: &[Constant], d: &[Constant]) -> Result<bool> {
    if c.len() != d.len() {
        return Err(Error::Schema(format!("tuples of length {} and {} are not comparable", c.len(), d.len())));
    }
    Ok(c.iter().zip(d).all(|(a, b)| info_leq_const(a, b)))
}

fn atom_leq(a: &GroundAtom, b: &GroundAtom) -> bool {
    a.pred == b.pred && a.args.len() == b.args.len() && a.args.iter().zip(&b.args).all(|(x, y)| info_leq_const(x, y))
}

/// Second condition of the closeness preorder on difference sets: every atom
/// of `delta1` is matched in `delta2` by an atom with at least as much
/// information, and a strictly more informative match must not be in `delta1`.
pub fn delta_leq(delta1: &BTreeSet<GroundAtom>, delta2: &BTreeSet<GroundAtom>) -> bool {
    delta1.iter().all(|a| delta2.iter().any(|b| atom_leq(a, b) && (a == b || !delta1.contains(b))))
}

/// `d1 ≤ d2` relative to `base`, with the chase bound given explicitly.
pub fn closer_leq_bounded(d1: &Instance, d2: &Instance, base: &Instance, bound: &Instance) -> bool {
    if !d2.is_subset(bound) {
        return true;
    }
    delta_leq(&base.symmetric_difference(d1), &base.symmetric_difference(d2))
}

/// `d1 ≤ d2` relative to `base` and the chase bound of `split`.
pub fn closer_leq(d1: &Instance, d2: &Instance, base: &Instance, split: &SigmaSplit) -> bool {
    closer_leq_bounded(d1, d2, base, &base.union(&r_chase(base, split)))
}

/// Strict version: `d1 ≤ d2` and not `d2 ≤ d1`.
pub fn closer_lt(d1: &Instance, d2: &Instance, base: &Instance, split: &SigmaSplit) -> bool {
    let bound = base.union(&r_chase(base, split));
    closer_leq_bounded(d1, d2, base, &bound) && !closer_leq_bounded(d2, d1, base, &bound)
}

fn sort_repairs(base: &Instance, mut repairs: Vec<Instance>) -> Vec<Instance> {
    repairs.sort_by_cached_key(|r| (base.symmetric_difference(r).len(), r.clone()));
    repairs.dedup();
    repairs
}

/// Null-based repairs with default options.
pub fn null_repairs(base: &Instance, sigma: &[Constraint]) -> Result<RepairSet> {
    null_repairs_with(base, sigma, &RepairOptions::default())
}

/// Null-based repairs: instances that null-satisfy `sigma` and have no
/// strictly closer null-satisfying instance.
///
/// Candidates are `(base ∖ deletions) ∪ insertions` with insertions drawn from
/// the restricted chase; frozen atoms, atoms of fixed predicates and atoms of
/// predicates that no constraint mentions never change.
pub fn null_repairs_with(base: &Instance, sigma: &[Constraint], opts: &RepairOptions) -> Result<RepairSet> {
    let split = split_sigma(sigma);
    let chase = r_chase(base, &split);
    let mentioned: BTreeSet<Name> = sigma.iter().flat_map(|c| c.predicates()).collect();
    let flippable: Vec<GroundAtom> = base
        .iter()
        .filter(|a| mentioned.contains(&a.pred) && !opts.frozen.contains(*a))
        .chain(chase.iter().filter(|a| !base.contains(a)))
        .filter(|a| !opts.fixed.contains(&a.pred))
        .cloned()
        .collect();
    let n = flippable.len();
    let required: u128 = if n >= 127 { u128::MAX } else { 1u128 << n };
    if required > opts.cap || n >= 64 {
        return Err(Error::Resource { what: "null-based repair candidates".into(), cap: opts.cap, required });
    }
    let stable: Instance = base.iter().filter(|a| !flippable.contains(a)).cloned().collect();
    let in_base: Vec<bool> = flippable.iter().map(|a| base.contains(a)).collect();
    let compiled: Vec<CompiledConstraint> = sigma.iter().map(CompiledConstraint::new).collect();

    // Candidate masks: bit i set means atom i is in the difference to the base.
    let build = |mask: u64| -> Instance {
        let mut d = stable.clone();
        for (i, a) in flippable.iter().enumerate() {
            let flipped = mask >> i & 1 == 1;
            if flipped != in_base[i] {
                d.insert(a.clone());
            }
        }
        d
    };
    let mut satisfying: Vec<u64> = Vec::new();
    for mask in 0..(1u64 << n) {
        let d = build(mask);
        if compiled.iter().all(|c| c.n_holds(&d)) {
            satisfying.push(mask);
        }
    }
    // Strictly more informative atoms within the flippable set.
    let up: Vec<u64> = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| j != i && atom_leq(&flippable[i], &flippable[j]))
                .fold(0u64, |m, j| m | 1 << j)
        })
        .collect();
    let leq = |s: u64, m: u64| -> bool {
        let mut rest = s & !m;
        while rest != 0 {
            let i = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            if up[i] & m & !s == 0 {
                return false;
            }
        }
        true
    };
    satisfying.sort_by_key(|m| (m.count_ones(), *m));
    let mut minimal: Vec<u64> = Vec::new();
    for &m in &satisfying {
        if !minimal.iter().any(|&k| k & m == k) {
            minimal.push(m);
        }
    }
    let repairs: Vec<Instance> = minimal
        .iter()
        .filter(|&&m| !satisfying.iter().any(|&s| s != m && leq(s, m) && !leq(m, s)))
        .map(|&m| build(m))
        .collect();
    Ok(RepairSet { repairs: sort_repairs(base, repairs), base: base.clone(), sigma: sigma.to_vec() })
}

/// Symmetric-difference repairs with default options.
pub fn delta_repairs(base: &Instance, sigma: &[Constraint]) -> Result<RepairSet> {
    delta_repairs_with(base, sigma, &RepairOptions::default())
}

fn ground(a: &crate::nullquery::CAtom, b: &Binding) -> GroundAtom {
    GroundAtom::from_parts(
        a.pred.clone(),
        a.terms
            .iter()
            .map(|t| match t {
                CTerm::Const(c) => c.clone(),
                CTerm::Slot(i) => b[*i].clone().expect("bound"),
            })
            .collect(),
    )
}

/// Repairs minimal under inclusion of the symmetric difference.
///
/// A branching search resolves the first violated instantiation either by
/// deleting one of its antecedent atoms from the base or by inserting the
/// missing atoms of one consequent disjunct, with existential witnesses from
/// the working universe. Deletions and insertions are never undone. The
/// leaves are filtered for inclusion-minimal differences.
pub fn delta_repairs_with(base: &Instance, sigma: &[Constraint], opts: &RepairOptions) -> Result<RepairSet> {
    let compiled: Vec<CConstraint> = sigma
        .iter()
        .map(|c| match opts.satisfaction {
            Satisfaction::Null => CompiledConstraint::new(c).rewritten,
            Satisfaction::Classical => CConstraint::compile(c),
        })
        .collect();
    let consts: BTreeSet<Constant> = sigma.iter().flat_map(|c| c.constants()).collect();
    let universe: Vec<Constant> = working_universe(base, &consts).into_iter().collect();

    type State = (BTreeSet<GroundAtom>, BTreeSet<GroundAtom>);
    let mut visited: HashSet<State> = HashSet::new();
    let mut stack: Vec<State> = vec![(BTreeSet::new(), BTreeSet::new())];
    let mut leaves: Vec<State> = Vec::new();
    while let Some((del, ins)) = stack.pop() {
        if !visited.insert((del.clone(), ins.clone())) {
            continue;
        }
        if visited.len() as u128 > opts.cap {
            return Err(Error::Resource {
                what: "symmetric-difference repair search nodes".into(),
                cap: opts.cap,
                required: visited.len() as u128,
            });
        }
        let mut cur: Instance = base.iter().filter(|a| !del.contains(a)).cloned().collect();
        cur.extend(ins.iter().cloned());
        let violation = compiled.iter().find_map(|c| c.violations(&cur).into_iter().next().map(|v| (c, v)));
        let Some((c, values)) = violation else {
            leaves.push((del, ins));
            continue;
        };
        let mut bind: Binding = vec![None; c.nslots];
        for (i, v) in values.into_iter().enumerate() {
            bind[i] = Some(v);
        }
        for a in &c.body {
            let g = ground(a, &bind);
            if base.contains(&g) && !ins.contains(&g) && !opts.fixed.contains(&g.pred) && !opts.frozen.contains(&g) {
                let mut d2 = del.clone();
                d2.insert(g);
                stack.push((d2, ins.clone()));
            }
        }
        for conj in &c.head {
            if conj.atoms.is_empty() {
                continue;
            }
            let exists = conj.exists.clone();
            crate::nullquery::enumerate_slots(&universe, &exists, &mut bind, &mut |b| {
                if !conj.builtins.iter().all(|x| crate::nullquery::builtin_holds(x, b)) {
                    return false;
                }
                let missing: Vec<GroundAtom> =
                    conj.atoms.iter().map(|a| ground(a, b)).filter(|g| !cur.contains(g)).collect();
                if missing.is_empty() || missing.iter().any(|g| del.contains(g) || opts.fixed.contains(&g.pred)) {
                    return false;
                }
                let mut i2 = ins.clone();
                i2.extend(missing);
                stack.push((del.clone(), i2));
                false
            });
        }
    }
    let deltas: Vec<BTreeSet<GroundAtom>> = leaves.iter().map(|(d, i)| d.union(i).cloned().collect()).collect();
    let mut repairs = Vec::new();
    for (k, (del, ins)) in leaves.iter().enumerate() {
        let dominated = deltas.iter().any(|other| other.len() < deltas[k].len() && other.is_subset(&deltas[k]));
        if !dominated {
            let mut r: Instance = base.iter().filter(|a| !del.contains(a)).cloned().collect();
            r.extend(ins.iter().cloned());
            repairs.push(r);
        }
    }
    Ok(RepairSet { repairs: sort_repairs(base, repairs), base: base.clone(), sigma: sigma.to_vec() })
}

/// Repairs under the chosen preorder.
pub fn repairs(base: &Instance, sigma: &[Constraint], kind: PreorderKind, opts: &RepairOptions) -> Result<RepairSet> {
    match kind {
        PreorderKind::NullBased => null_repairs_with(base, sigma, opts),
        PreorderKind::SymmetricDelta => delta_repairs_with(base, sigma, opts),
    }
}
