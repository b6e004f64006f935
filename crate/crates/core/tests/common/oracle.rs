//! Naive reference evaluators written directly from the definitions, used to
//! cross-check the library. They enumerate assignments over the whole
//! working universe and subsets of candidate atoms, so they only suit small
//! inputs.

use std::collections::{BTreeMap, BTreeSet};

use pdes::dec::{Atom, Builtin, CmpOp, Conjunct, ConjunctiveQuery, Constraint, Literal, Term};
use pdes::pdes::{inc_marker, Pdes, Trust};
use pdes::relational::{Constant, GroundAtom, Instance};
use pdes::repair::PreorderKind;

pub type Env = BTreeMap<String, Constant>;

/// Active domain of `d`, the given constants and `null`, in canonical order.
pub fn universe<'a>(d: &Instance, consts: impl IntoIterator<Item = &'a Constant>) -> Vec<Constant> {
    let mut u: BTreeSet<Constant> = d.iter().flat_map(|a| a.args.iter().cloned()).collect();
    u.extend(consts.into_iter().cloned());
    u.insert(Constant::Null);
    u.into_iter().collect()
}

fn value(t: &Term, env: &Env) -> Constant {
    match t {
        Term::Var(v) => env[v.as_ref()].clone(),
        Term::Const(c) => c.clone(),
    }
}

fn order(a: &Constant, b: &Constant) -> Option<std::cmp::Ordering> {
    if a.is_null() || b.is_null() {
        return None;
    }
    match (a.token().parse::<i64>(), b.token().parse::<i64>()) {
        (Ok(x), Ok(y)) => Some(x.cmp(&y)),
        _ => Some(a.token().cmp(b.token())),
    }
}

/// Comparison with `null` as an ordinary constant; order comparisons with `null` fail.
pub fn cmp_classical(op: CmpOp, a: &Constant, b: &Constant) -> bool {
    use std::cmp::Ordering::*;
    match op {
        CmpOp::Eq => a == b,
        CmpOp::Neq => a != b,
        CmpOp::Lt => order(a, b) == Some(Less),
        CmpOp::Leq => matches!(order(a, b), Some(Less | Equal)),
        CmpOp::Gt => order(a, b) == Some(Greater),
        CmpOp::Geq => matches!(order(a, b), Some(Greater | Equal)),
    }
}

fn builtin_classical(b: &Builtin, env: &Env) -> bool {
    match b {
        Builtin::Cmp(op, x, y) => cmp_classical(*op, &value(x, env), &value(y, env)),
        Builtin::IsNull(t) => value(t, env).is_null(),
        Builtin::IsNotNull(t) => !value(t, env).is_null(),
        Builtin::False => false,
    }
}

/// Null-aware builtin: comparisons need two non-null operands.
fn builtin_n(b: &Builtin, env: &Env) -> bool {
    match b {
        Builtin::Cmp(op, x, y) => {
            let (a, c) = (value(x, env), value(y, env));
            !a.is_null() && !c.is_null() && cmp_classical(*op, &a, &c)
        }
        other => builtin_classical(other, env),
    }
}

fn is_guard(b: &Builtin) -> bool {
    match b {
        Builtin::IsNull(_) | Builtin::IsNotNull(_) => true,
        Builtin::Cmp(_, x, y) => matches!(x, Term::Const(Constant::Null)) || matches!(y, Term::Const(Constant::Null)),
        Builtin::False => false,
    }
}

fn count_literal(l: &Literal, counts: &mut BTreeMap<String, usize>) {
    let terms: Vec<&Term> = match l {
        Literal::Atom(a) => a.terms.iter().collect(),
        Literal::Builtin(b) if is_guard(b) => Vec::new(),
        Literal::Builtin(b) => b.terms(),
    };
    for t in terms {
        if let Term::Var(v) = t {
            *counts.entry(v.to_string()).or_default() += 1;
        }
    }
}

/// Variables occurring at least twice outside null guards.
pub fn relevant(literals: &[Literal]) -> BTreeSet<String> {
    let mut counts = BTreeMap::new();
    for l in literals {
        count_literal(l, &mut counts);
    }
    counts.into_iter().filter(|(_, n)| *n >= 2).map(|(v, _)| v).collect()
}

fn constraint_literals(c: &Constraint) -> Vec<Literal> {
    let mut out: Vec<Literal> = c.body.iter().cloned().map(Literal::Atom).collect();
    for conj in &c.head {
        out.extend(conj.literals.iter().cloned());
    }
    out
}

/// Relevant variables of a constraint.
pub fn relevant_of(c: &Constraint) -> BTreeSet<String> {
    relevant(&constraint_literals(c))
}

fn ground(a: &Atom, env: &Env) -> GroundAtom {
    GroundAtom::from_parts(a.pred.clone(), a.terms.iter().map(|t| value(t, env)).collect())
}

/// Calls `f` on every extension of `env` to `vars` over `u` until it returns true.
fn any_assignment(vars: &[String], u: &[Constant], env: &mut Env, f: &mut dyn FnMut(&Env) -> bool) -> bool {
    match vars.split_first() {
        None => f(env),
        Some((v, rest)) => {
            for c in u {
                env.insert(v.clone(), c.clone());
                if any_assignment(rest, u, env, f) {
                    env.remove(v);
                    return true;
                }
            }
            env.remove(v);
            false
        }
    }
}

fn query_vars(q: &ConjunctiveQuery) -> Vec<String> {
    q.free.iter().map(|v| v.to_string()).collect()
}

fn query_answers(d: &Instance, q: &ConjunctiveQuery, null_aware: bool) -> BTreeSet<Vec<Constant>> {
    let u = universe(d, &q.constants());
    let rel = if null_aware { relevant(&q.literals) } else { BTreeSet::new() };
    let free = query_vars(q);
    let exists: Vec<String> = q.exists.iter().map(|v| v.to_string()).collect();
    let mut out = BTreeSet::new();
    let mut env = Env::new();
    any_assignment(&free, &u, &mut env, &mut |env: &Env| {
        if free.iter().any(|v| rel.contains(v) && env[v].is_null()) {
            return false;
        }
        let mut inner = env.clone();
        let found = any_assignment(&exists, &u, &mut inner, &mut |e: &Env| {
            if exists.iter().any(|v| rel.contains(v) && e[v].is_null()) {
                return false;
            }
            q.literals.iter().all(|l| match l {
                Literal::Atom(a) => d.contains(&ground(a, e)),
                Literal::Builtin(b) if null_aware => builtin_n(b, e),
                Literal::Builtin(b) => builtin_classical(b, e),
            })
        });
        if found {
            out.insert(free.iter().map(|v| env[v].clone()).collect());
        }
        false
    });
    out
}

/// Answers under the null semantics: relevant variables range over non-null values.
pub fn n_answers(d: &Instance, q: &ConjunctiveQuery) -> BTreeSet<Vec<Constant>> {
    query_answers(d, q, true)
}

/// Classical answers with `null` as an ordinary constant.
pub fn classical_answers(d: &Instance, q: &ConjunctiveQuery) -> BTreeSet<Vec<Constant>> {
    query_answers(d, q, false)
}

fn disjunct_holds(conj: &Conjunct, d: &Instance, u: &[Constant], env: &Env, rel: &BTreeSet<String>) -> bool {
    let exists: Vec<String> = conj.exists.iter().map(|v| v.to_string()).collect();
    let mut inner = env.clone();
    any_assignment(&exists, u, &mut inner, &mut |e: &Env| {
        if exists.iter().any(|v| rel.contains(v) && e[v].is_null()) {
            return false;
        }
        conj.literals.iter().all(|l| match l {
            Literal::Atom(a) => d.contains(&ground(a, e)),
            Literal::Builtin(b) => builtin_classical(b, e),
        })
    })
}

fn universals(c: &Constraint) -> Vec<String> {
    let mut vars: Vec<String> = c.forall.iter().map(|v| v.to_string()).collect();
    for a in &c.body {
        for v in a.vars() {
            if !vars.iter().any(|w| w == v.as_ref()) {
                vars.push(v.to_string());
            }
        }
    }
    vars
}

fn constraint_holds(d: &Instance, c: &Constraint, null_aware: bool) -> bool {
    let u = universe(d, &c.constants());
    let rel = if null_aware { relevant_of(c) } else { BTreeSet::new() };
    let vars = universals(c);
    let mut env = Env::new();
    let violated = any_assignment(&vars, &u, &mut env, &mut |e: &Env| {
        if !c.body.iter().all(|a| d.contains(&ground(a, e))) {
            return false;
        }
        if vars.iter().any(|v| rel.contains(v) && e[v].is_null()) {
            return false;
        }
        !c.head.iter().any(|conj| disjunct_holds(conj, d, &u, e, &rel))
    });
    !violated
}

/// Satisfaction under the null semantics.
pub fn n_holds(d: &Instance, c: &Constraint) -> bool {
    constraint_holds(d, c, true)
}

/// Classical satisfaction with `null` as an ordinary constant.
pub fn classical_holds(d: &Instance, c: &Constraint) -> bool {
    constraint_holds(d, c, false)
}

/// True when an existential of `c` is joined or compared inside its disjunct.
pub fn problematic(c: &Constraint) -> bool {
    c.head.iter().any(|conj| {
        conj.exists.iter().any(|y| {
            let n: usize = conj
                .literals
                .iter()
                .map(|l| match l {
                    Literal::Atom(a) => a.terms.iter().filter(|t| t.as_var() == Some(y)).count(),
                    Literal::Builtin(b) => 2 * b.terms().iter().filter(|t| t.as_var() == Some(y)).count(),
                })
                .sum();
            n >= 2
        })
    })
}

/// Restricted chase by saturation over the non-problematic constraints.
pub fn chase(d: &Instance, sigma: &[Constraint]) -> Instance {
    let chased: Vec<&Constraint> = sigma.iter().filter(|c| !problematic(c)).collect();
    let consts: BTreeSet<Constant> = chased.iter().flat_map(|c| c.constants()).collect();
    let mut cur = d.clone();
    loop {
        let u = universe(&cur, &consts);
        let mut new = Vec::new();
        for c in &chased {
            let rel = relevant_of(c);
            let vars = universals(c);
            let mut env = Env::new();
            any_assignment(&vars, &u, &mut env, &mut |e: &Env| {
                if !c.body.iter().all(|a| cur.contains(&ground(a, e))) {
                    return false;
                }
                if vars.iter().any(|v| rel.contains(v) && e[v].is_null()) {
                    return false;
                }
                let builtin_only_true = c
                    .head
                    .iter()
                    .filter(|conj| conj.literals.iter().all(|l| matches!(l, Literal::Builtin(_))))
                    .any(|conj| conj.literals.iter().all(|l| matches!(l, Literal::Builtin(b) if builtin_classical(b, e))));
                if builtin_only_true {
                    return false;
                }
                for conj in &c.head {
                    let mut ext = e.clone();
                    for y in &conj.exists {
                        ext.insert(y.to_string(), Constant::Null);
                    }
                    let builtins_hold = conj.literals.iter().all(|l| match l {
                        Literal::Builtin(b) => builtin_classical(b, &ext),
                        Literal::Atom(_) => true,
                    });
                    if !builtins_hold {
                        continue;
                    }
                    for l in &conj.literals {
                        if let Literal::Atom(a) = l {
                            new.push(ground(a, &ext));
                        }
                    }
                }
                false
            });
        }
        let before = cur.len();
        cur.extend(new);
        if cur.len() == before {
            return cur;
        }
    }
}

fn info_leq(a: &GroundAtom, b: &GroundAtom) -> bool {
    a.pred == b.pred && a.args.len() == b.args.len() && a.args.iter().zip(&b.args).all(|(x, y)| x.is_null() || x == y)
}

/// Closeness preorder restricted to candidates inside the chase bound.
pub fn closer_leq(d1: &Instance, d2: &Instance, base: &Instance) -> bool {
    let delta1 = base.symmetric_difference(d1);
    let delta2 = base.symmetric_difference(d2);
    delta1.iter().all(|a| {
        delta2.iter().any(|b| info_leq(a, b) && (a == b || !delta1.contains(b)))
    })
}

fn subsets(atoms: &[GroundAtom], keep: &Instance) -> Vec<Instance> {
    let n = atoms.len();
    (0u64..(1u64 << n))
        .map(|mask| {
            let mut d = keep.clone();
            d.extend((0..n).filter(|i| mask >> i & 1 == 1).map(|i| atoms[i].clone()));
            d
        })
        .collect()
}

/// Null-based repairs by exhaustive enumeration of subsets of the chase
/// bound, leaving atoms of `fixed` predicates untouched. `None` when the
/// bound has more than `max_atoms` changeable atoms.
pub fn null_repairs(
    base: &Instance,
    sigma: &[Constraint],
    fixed: &BTreeSet<String>,
    max_atoms: usize,
) -> Option<BTreeSet<Instance>> {
    let is_fixed = |a: &GroundAtom| fixed.contains(a.pred.as_ref());
    let keep: Instance = base.iter().filter(|a| is_fixed(a)).cloned().collect();
    let bound: Vec<GroundAtom> =
        base.union(&chase(base, sigma)).iter().filter(|a| !is_fixed(a)).cloned().collect();
    if bound.len() > max_atoms {
        return None;
    }
    let sat: Vec<Instance> = subsets(&bound, &keep)
        .into_iter()
        .filter(|d| sigma.iter().all(|c| n_holds(d, c)))
        .collect();
    let lt = |a: &Instance, b: &Instance| closer_leq(a, b, base) && !closer_leq(b, a, base);
    Some(sat.iter().filter(|d| !sat.iter().any(|e| lt(e, d))).cloned().collect())
}

/// Ground consequent atoms reachable from `base`: every database atom of a
/// consequent instantiation whose antecedent lies in the closure. Insertions
/// of a Δ-minimal repair always come from this set.
pub fn head_closure(base: &Instance, sigma: &[Constraint]) -> Instance {
    let consts: BTreeSet<Constant> = sigma.iter().flat_map(|c| c.constants()).collect();
    let mut cur = base.clone();
    loop {
        let u = universe(&cur, &consts);
        let mut new = Vec::new();
        for c in sigma {
            let vars = universals(c);
            let mut env = Env::new();
            any_assignment(&vars, &u, &mut env, &mut |e: &Env| {
                if c.body.iter().all(|a| cur.contains(&ground(a, e))) {
                    for conj in &c.head {
                        let ex: Vec<String> = conj.exists.iter().map(|v| v.to_string()).collect();
                        let mut inner = e.clone();
                        any_assignment(&ex, &u, &mut inner, &mut |g: &Env| {
                            for l in &conj.literals {
                                if let Literal::Atom(a) = l {
                                    new.push(ground(a, g));
                                }
                            }
                            false
                        });
                    }
                }
                false
            });
        }
        let before = cur.len();
        cur.extend(new);
        if cur.len() == before {
            return cur;
        }
    }
}

/// Δ-minimal repairs under null-aware or classical satisfaction, leaving
/// atoms of `fixed` predicates untouched. `None` when the candidate set
/// exceeds `max_atoms`.
pub fn delta_repairs(
    base: &Instance,
    sigma: &[Constraint],
    fixed: &BTreeSet<String>,
    null_aware: bool,
    max_atoms: usize,
) -> Option<BTreeSet<Instance>> {
    let closure = head_closure(base, sigma);
    let is_fixed = |a: &GroundAtom| fixed.contains(a.pred.as_ref());
    let keep: Instance = base.iter().filter(|a| is_fixed(a)).cloned().collect();
    let free: Vec<GroundAtom> = closure.iter().filter(|a| !is_fixed(a)).cloned().collect();
    if free.len() > max_atoms {
        return None;
    }
    let sat: Vec<(Instance, BTreeSet<GroundAtom>)> = subsets(&free, &keep)
        .into_iter()
        .filter(|d| sigma.iter().all(|c| constraint_holds(d, c, null_aware)))
        .map(|d| {
            let delta = base.symmetric_difference(&d);
            (d, delta)
        })
        .collect();
    Some(
        sat.iter()
            .filter(|(_, delta)| !sat.iter().any(|(_, other)| other != delta && other.is_subset(delta)))
            .map(|(d, _)| d.clone())
            .collect(),
    )
}

fn core_of(solutions: &[Instance], peer: &str) -> Instance {
    match solutions.split_first() {
        None => std::iter::once(inc_marker(peer)).collect(),
        Some((first, rest)) => rest.iter().fold(first.clone(), |acc, d| acc.intersection(d)),
    }
}

/// Solutions of peer `p`, recursively over its neighbors: repairs of its
/// data joined with the neighbor cores, with the predicates of less-trusted
/// neighbors held fixed, restricted to the schema of `p`. `None` when some
/// repair problem on the way exceeds `max_atoms`.
pub fn solutions(pdes: &Pdes, p: &str, max_atoms: usize) -> Option<Vec<Instance>> {
    let s = &pdes.schema;
    let own: BTreeSet<_> = s.preds_of(p);
    let data = pdes.instance.get(p);
    let owned: Vec<(String, Constraint)> = s
        .sigma
        .iter()
        .filter(|((from, _), _)| from.as_ref() == p)
        .flat_map(|((_, to), cs)| cs.iter().map(move |c| (to.to_string(), c.clone())))
        .collect();
    if owned.is_empty() {
        return Some(vec![data]);
    }
    let targets: BTreeSet<String> = owned.iter().map(|(q, _)| q.clone()).filter(|q| q != p).collect();
    let mut dbar = data;
    let mut fixed = BTreeSet::new();
    for q in &targets {
        dbar.extend(core_of(&solutions(pdes, q, max_atoms)?, q).iter().cloned());
        if s.trust.get(&(p.into(), q.as_str().into())) == Some(&Trust::Less) {
            fixed.extend(s.preds_of(q).iter().map(|n| n.to_string()));
        }
    }
    let sigma: Vec<Constraint> = owned
        .into_iter()
        .filter(|(q, _)| !dbar.contains(&inc_marker(q)))
        .map(|(_, c)| c)
        .collect();
    let repairs = match s.preorder {
        PreorderKind::NullBased => null_repairs(&dbar, &sigma, &fixed, max_atoms)?,
        PreorderKind::SymmetricDelta => delta_repairs(&dbar, &sigma, &fixed, true, max_atoms)?,
    };
    let out: BTreeSet<Instance> = repairs.iter().map(|d| d.restrict(&own)).collect();
    Some(out.into_iter().collect())
}
