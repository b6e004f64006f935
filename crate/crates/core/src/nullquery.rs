//! Query answering and constraint checking under the null-aware semantics
//! (relevant variables never take `null`) and under the classical semantics
//! (`null` is an ordinary constant).
//!
//! Two independent evaluators are provided for each task: a join-based one
//! working on compiled formulas, and a direct one that enumerates assignments
//! case by case. Tests check that they agree.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::dec::{
    n_rewrite_constraint, n_rewrite_query, Atom, Builtin, CmpOp, ConjunctiveQuery, Constraint, Literal, Relevance, Term,
    Var,
};
use crate::relational::{Assignment, Constant, Instance, Name};

/// Answer to a conjunctive query.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AnswerSet {
    /// Answer tuples in canonical order (empty for Boolean queries).
    pub tuples: BTreeSet<Vec<Constant>>,
    /// Answer of a Boolean query.
    pub boolean: BooleanAnswer,
}

/// Tri-state Boolean answer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BooleanAnswer {
    /// Boolean query holds.
    Yes,
    /// Boolean query fails.
    No,
    /// The query has free variables.
    #[serde(rename = "n/a")]
    NotApplicable,
}

impl AnswerSet {
    /// Answer set of `q` from its answer tuples; a Boolean query yields `yes`
    /// exactly when the empty tuple is present.
    pub fn for_query(q: &ConjunctiveQuery, tuples: BTreeSet<Vec<Constant>>) -> AnswerSet {
        if q.is_boolean() {
            let boolean = if tuples.is_empty() { BooleanAnswer::No } else { BooleanAnswer::Yes };
            AnswerSet { tuples: BTreeSet::new(), boolean }
        } else {
            AnswerSet { tuples, boolean: BooleanAnswer::NotApplicable }
        }
    }

    /// Answers as `a,b` strings, or `yes`/`no` for Boolean queries.
    pub fn render(&self) -> Vec<String> {
        match self.boolean {
            BooleanAnswer::Yes => vec!["yes".into()],
            BooleanAnswer::No => vec!["no".into()],
            BooleanAnswer::NotApplicable => self
                .tuples
                .iter()
                .map(|t| t.iter().map(|c| c.token().to_string()).collect::<Vec<_>>().join(","))
                .collect(),
        }
    }

    /// Intersection of two answer sets for the same query.
    pub fn intersect(&self, other: &AnswerSet) -> AnswerSet {
        let boolean = match (self.boolean, other.boolean) {
            (BooleanAnswer::Yes, BooleanAnswer::Yes) => BooleanAnswer::Yes,
            (BooleanAnswer::NotApplicable, _) => BooleanAnswer::NotApplicable,
            _ => BooleanAnswer::No,
        };
        AnswerSet { tuples: self.tuples.intersection(&other.tuples).cloned().collect(), boolean }
    }
}

/// Working universe: active domain, the given constants and `null`.
pub fn working_universe<'a>(d: &Instance, consts: impl IntoIterator<Item = &'a Constant>) -> BTreeSet<Constant> {
    let mut u = d.active_domain();
    u.extend(consts.into_iter().cloned());
    u.insert(Constant::Null);
    u
}

// ---------------------------------------------------------------------------
// Builtin semantics
// ---------------------------------------------------------------------------

fn cmp_holds(op: CmpOp, a: &Constant, b: &Constant) -> bool {
    use std::cmp::Ordering::*;
    match op {
        CmpOp::Eq => a == b,
        CmpOp::Neq => a != b,
        _ => match a.value_cmp(b) {
            None => false,
            Some(o) => match op {
                CmpOp::Lt => o == Less,
                CmpOp::Leq => o != Greater,
                CmpOp::Gt => o == Greater,
                CmpOp::Geq => o != Less,
                CmpOp::Eq | CmpOp::Neq => unreachable!(),
            },
        },
    }
}

/// Classical builtin semantics: `null` is an ordinary constant for `=` and
/// `!=`, and incomparable for the order comparisons.
pub fn classical_builtin(op: CmpOp, a: &Constant, b: &Constant) -> bool {
    cmp_holds(op, a, b)
}

/// Null-aware builtin semantics: every comparison needs two non-null operands.
pub fn null_builtin(op: CmpOp, a: &Constant, b: &Constant) -> bool {
    !a.is_null() && !b.is_null() && cmp_holds(op, a, b)
}

// ---------------------------------------------------------------------------
// Compiled, join-based evaluation (classical, null as a constant)
// ---------------------------------------------------------------------------

/// Term with variables replaced by slot numbers.
#[derive(Clone, Debug)]
pub(crate) enum CTerm {
    Slot(usize),
    Const(Constant),
}

/// Database atom over slots.
#[derive(Clone, Debug)]
pub(crate) struct CAtom {
    pub pred: Name,
    pub terms: Vec<CTerm>,
}

/// Builtin over slots.
#[derive(Clone, Debug)]
pub(crate) enum CBuiltin {
    Cmp(CmpOp, CTerm, CTerm),
    IsNull(CTerm),
    IsNotNull(CTerm),
    False,
}

/// Partial assignment indexed by slot.
pub(crate) type Binding = Vec<Option<Constant>>;

#[derive(Default, Clone, Debug)]
pub(crate) struct Slots {
    pub names: Vec<Var>,
}

impl Slots {
    pub fn slot(&mut self, v: &Var) -> usize {
        match self.names.iter().position(|n| n == v) {
            Some(i) => i,
            None => {
                self.names.push(v.clone());
                self.names.len() - 1
            }
        }
    }

    pub fn term(&mut self, t: &Term) -> CTerm {
        match t {
            Term::Var(v) => CTerm::Slot(self.slot(v)),
            Term::Const(c) => CTerm::Const(c.clone()),
        }
    }

    pub fn atom(&mut self, a: &Atom) -> CAtom {
        CAtom { pred: a.pred.clone(), terms: a.terms.iter().map(|t| self.term(t)).collect() }
    }

    pub fn builtin(&mut self, b: &Builtin) -> CBuiltin {
        match b {
            Builtin::Cmp(op, x, y) => CBuiltin::Cmp(*op, self.term(x), self.term(y)),
            Builtin::IsNull(t) => CBuiltin::IsNull(self.term(t)),
            Builtin::IsNotNull(t) => CBuiltin::IsNotNull(self.term(t)),
            Builtin::False => CBuiltin::False,
        }
    }
}

pub(crate) fn value<'a>(t: &'a CTerm, b: &'a Binding) -> &'a Constant {
    match t {
        CTerm::Const(c) => c,
        CTerm::Slot(i) => b[*i].as_ref().expect("slot bound before builtin evaluation"),
    }
}

pub(crate) fn builtin_holds(b: &CBuiltin, bind: &Binding) -> bool {
    match b {
        CBuiltin::Cmp(op, x, y) => classical_builtin(*op, value(x, bind), value(y, bind)),
        CBuiltin::IsNull(t) => value(t, bind).is_null(),
        CBuiltin::IsNotNull(t) => !value(t, bind).is_null(),
        CBuiltin::False => false,
    }
}

/// Enumerate extensions of `bind` matching `atoms` in `d`. The callback
/// returns `true` to stop; the function returns `true` when stopped.
pub(crate) fn match_atoms(d: &Instance, atoms: &[CAtom], bind: &mut Binding, f: &mut dyn FnMut(&mut Binding) -> bool) -> bool {
    let Some((first, rest)) = atoms.split_first() else {
        return f(bind);
    };
    let mut newly = Vec::with_capacity(first.terms.len());
    for tuple in d.relation(&first.pred) {
        if tuple.len() != first.terms.len() {
            continue;
        }
        newly.clear();
        let mut ok = true;
        for (t, c) in first.terms.iter().zip(tuple) {
            match t {
                CTerm::Const(k) => {
                    if k != c {
                        ok = false;
                        break;
                    }
                }
                CTerm::Slot(i) => match &bind[*i] {
                    Some(v) => {
                        if v != c {
                            ok = false;
                            break;
                        }
                    }
                    None => {
                        bind[*i] = Some(c.clone());
                        newly.push(*i);
                    }
                },
            }
        }
        let stop = ok && match_atoms(d, rest, bind, f);
        for i in &newly {
            bind[*i] = None;
        }
        if stop {
            return true;
        }
    }
    false
}

/// Enumerate all values in `universe` for the still-unbound `slots`.
pub(crate) fn enumerate_slots(
    universe: &[Constant],
    slots: &[usize],
    bind: &mut Binding,
    f: &mut dyn FnMut(&mut Binding) -> bool,
) -> bool {
    let Some((&first, rest)) = slots.split_first() else {
        return f(bind);
    };
    if bind[first].is_some() {
        return enumerate_slots(universe, rest, bind, f);
    }
    for c in universe {
        bind[first] = Some(c.clone());
        if enumerate_slots(universe, rest, bind, f) {
            bind[first] = None;
            return true;
        }
    }
    bind[first] = None;
    false
}

/// One compiled consequent disjunct.
#[derive(Clone, Debug)]
pub(crate) struct CConj {
    pub exists: Vec<usize>,
    pub atoms: Vec<CAtom>,
    pub builtins: Vec<CBuiltin>,
}

/// A constraint compiled to slots. Slots `0..forall.len()` are the universal variables.
#[derive(Clone, Debug)]
pub(crate) struct CConstraint {
    pub nslots: usize,
    pub nforall: usize,
    pub body: Vec<CAtom>,
    pub head: Vec<CConj>,
    /// Universal slots that do not occur in the antecedent.
    pub head_only: Vec<usize>,
    pub constants: Vec<Constant>,
}

impl CConstraint {
    pub fn compile(c: &Constraint) -> CConstraint {
        let mut slots = Slots::default();
        for v in &c.forall {
            slots.slot(v);
        }
        let body: Vec<CAtom> = c.body.iter().map(|a| slots.atom(a)).collect();
        let mut in_body = vec![false; c.forall.len()];
        for a in &body {
            for t in &a.terms {
                if let CTerm::Slot(i) = t {
                    in_body[*i] = true;
                }
            }
        }
        let head = c
            .head
            .iter()
            .map(|conj| {
                let exists = conj.exists.iter().map(|v| slots.slot(v)).collect();
                let mut atoms = Vec::new();
                let mut builtins = Vec::new();
                for l in &conj.literals {
                    match l {
                        Literal::Atom(a) => atoms.push(slots.atom(a)),
                        Literal::Builtin(b) => builtins.push(slots.builtin(b)),
                    }
                }
                CConj { exists, atoms, builtins }
            })
            .collect();
        CConstraint {
            nslots: slots.names.len(),
            nforall: c.forall.len(),
            body,
            head,
            head_only: (0..c.forall.len()).filter(|i| !in_body[*i]).collect(),
            constants: c.constants().into_iter().collect(),
        }
    }

    /// Does the consequent hold under the (complete universal) binding?
    pub fn head_holds(&self, d: &Instance, bind: &mut Binding) -> bool {
        self.head.iter().any(|conj| {
            match_atoms(d, &conj.atoms, bind, &mut |b| conj.builtins.iter().all(|x| builtin_holds(x, b)))
        })
    }

    /// Visit every universal binding whose antecedent holds in `d`. Head-only
    /// universals range over `universe`. Returns `true` if stopped.
    pub fn for_each_body_match(&self, d: &Instance, universe: &[Constant], f: &mut dyn FnMut(&mut Binding) -> bool) -> bool {
        let mut bind: Binding = vec![None; self.nslots];
        let head_only = self.head_only.clone();
        match_atoms(d, &self.body, &mut bind, &mut |b| enumerate_slots(universe, &head_only, b, f))
    }

    /// Universe used for head-only universals.
    pub fn universe(&self, d: &Instance) -> Vec<Constant> {
        if self.head_only.is_empty() {
            Vec::new()
        } else {
            working_universe(d, &self.constants).into_iter().collect()
        }
    }

    /// Classical satisfaction.
    pub fn holds(&self, d: &Instance) -> bool {
        let u = self.universe(d);
        !self.for_each_body_match(d, &u, &mut |b| !self.head_holds(d, b))
    }

    /// Violating universal instantiations (values of the universal variables).
    pub fn violations(&self, d: &Instance) -> Vec<Vec<Constant>> {
        let u = self.universe(d);
        let mut out = Vec::new();
        self.for_each_body_match(d, &u, &mut |b| {
            if !self.head_holds(d, b) {
                out.push(b[..self.nforall].iter().map(|c| c.clone().expect("universal bound")).collect());
            }
            false
        });
        out
    }
}

/// A constraint together with its null-aware rewriting, compiled once for
/// repeated checks over many instances.
#[derive(Clone, Debug)]
pub struct CompiledConstraint {
    /// The original constraint.
    pub source: Constraint,
    pub(crate) rewritten: CConstraint,
}

impl CompiledConstraint {
    /// Compile the rewriting `ψ^N` of `c`.
    pub fn new(c: &Constraint) -> CompiledConstraint {
        CompiledConstraint { source: c.clone(), rewritten: CConstraint::compile(&n_rewrite_constraint(c)) }
    }

    /// `d ⊨_N ψ`.
    pub fn n_holds(&self, d: &Instance) -> bool {
        self.rewritten.holds(d)
    }

    /// Universal instantiations violating `ψ^N` in `d`, in the order of `source.forall`.
    pub fn n_violations(&self, d: &Instance) -> Vec<Vec<Constant>> {
        self.rewritten.violations(d)
    }
}

/// `d ⊨_N c`, computed as classical satisfaction of the rewriting `c^N`.
pub fn n_holds(d: &Instance, c: &Constraint) -> bool {
    CConstraint::compile(&n_rewrite_constraint(c)).holds(d)
}

/// Classical satisfaction with `null` as an ordinary constant.
pub fn classical_holds(d: &Instance, c: &Constraint) -> bool {
    CConstraint::compile(c).holds(d)
}

/// Classical answers with `null` as an ordinary constant (join-based).
pub fn classical_answers(d: &Instance, q: &ConjunctiveQuery) -> AnswerSet {
    let mut slots = Slots::default();
    for v in &q.free {
        slots.slot(v);
    }
    let mut atoms = Vec::new();
    let mut builtins = Vec::new();
    for l in &q.literals {
        match l {
            Literal::Atom(a) => atoms.push(slots.atom(a)),
            Literal::Builtin(b) => builtins.push(slots.builtin(b)),
        }
    }
    let universe: Vec<Constant> = working_universe(d, &q.constants()).into_iter().collect();
    let nfree = q.free.len();
    let all: Vec<usize> = (0..slots.names.len()).collect();
    let mut bind: Binding = vec![None; slots.names.len()];
    let mut tuples = BTreeSet::new();
    match_atoms(d, &atoms, &mut bind, &mut |b| {
        enumerate_slots(&universe, &all, b, &mut |b| {
            if builtins.iter().all(|x| builtin_holds(x, b)) {
                tuples.insert(b[..nfree].iter().map(|c| c.clone().expect("bound")).collect());
            }
            false
        })
    });
    AnswerSet::for_query(q, tuples)
}

// ---------------------------------------------------------------------------
// Direct, case-by-case null-aware evaluation
// ---------------------------------------------------------------------------

/// Prenex formula accepted by [`n_satisfies`]: an existential prefix over a
/// conjunctive matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Formula {
    /// Conjunction of literals (the matrix).
    Conj(Vec<Literal>),
    /// `∃v φ`.
    Exists(Var, Box<Formula>),
}

impl Formula {
    /// `∃ȳ ψ` of a conjunctive query.
    pub fn from_query(q: &ConjunctiveQuery) -> Formula {
        q.exists
            .iter()
            .rev()
            .fold(Formula::Conj(q.literals.clone()), |f, v| Formula::Exists(v.clone(), Box::new(f)))
    }

    fn matrix(&self) -> &[Literal] {
        match self {
            Formula::Conj(l) => l,
            Formula::Exists(_, f) => f.matrix(),
        }
    }

    /// Relevant variables of the matrix.
    pub fn relevant_vars(&self) -> BTreeSet<Var> {
        ConjunctiveQuery { free: vec![], exists: vec![], literals: self.matrix().to_vec() }.relevant_vars()
    }
}

fn term_value<'a>(t: &'a Term, s: &'a Assignment) -> &'a Constant {
    match t {
        Term::Const(c) => c,
        Term::Var(v) => s.get(v).unwrap_or_else(|| panic!("variable {v} is not assigned")),
    }
}

fn n_literal(d: &Instance, l: &Literal, s: &Assignment) -> bool {
    match l {
        Literal::Atom(a) => {
            let args: Vec<Constant> = a.terms.iter().map(|t| term_value(t, s).clone()).collect();
            d.contains_tuple(&a.pred, &args)
        }
        Literal::Builtin(Builtin::IsNull(t)) => term_value(t, s).is_null(),
        Literal::Builtin(Builtin::IsNotNull(t)) => !term_value(t, s).is_null(),
        Literal::Builtin(Builtin::Cmp(op, a, b)) => null_builtin(*op, term_value(a, s), term_value(b, s)),
        Literal::Builtin(Builtin::False) => false,
    }
}

fn n_sat(d: &Instance, f: &Formula, s: &mut Assignment, rel: &BTreeSet<Var>, universe: &BTreeSet<Constant>) -> bool {
    match f {
        Formula::Conj(lits) => {
            let relevant_ok = lits
                .iter()
                .flat_map(|l| l.vars())
                .filter(|v| rel.contains(*v))
                .all(|v| !term_value(&Term::Var(v.clone()), s).is_null());
            relevant_ok && lits.iter().all(|l| n_literal(d, l, s))
        }
        Formula::Exists(y, g) => {
            let old = s.get(y).cloned();
            let mut found = false;
            for c in universe {
                if rel.contains(y) && c.is_null() {
                    continue;
                }
                s.insert(y.clone(), c.clone());
                if n_sat(d, g, s, rel, universe) {
                    found = true;
                    break;
                }
            }
            match old {
                Some(c) => s.insert(y.clone(), c),
                None => s.remove(y),
            };
            found
        }
    }
}

/// `d ⊨_N f[s]`, evaluated case by case: builtins need non-null operands,
/// relevant variables of the matrix must be non-null, and existential
/// quantifiers on relevant variables skip `null`. Quantifiers range over `universe`.
pub fn n_satisfies(d: &Instance, f: &Formula, s: &Assignment, universe: &BTreeSet<Constant>) -> bool {
    let rel = f.relevant_vars();
    let mut s = s.clone();
    n_sat(d, f, &mut s, &rel, universe)
}

/// Null-aware answers, evaluated directly over all candidate tuples.
pub fn n_answers(d: &Instance, q: &ConjunctiveQuery) -> AnswerSet {
    let universe = working_universe(d, &q.constants());
    let f = Formula::from_query(q);
    let rel = f.relevant_vars();
    let mut tuples = BTreeSet::new();
    let mut s = Assignment::new();
    fn rec(
        d: &Instance,
        q: &ConjunctiveQuery,
        f: &Formula,
        rel: &BTreeSet<Var>,
        universe: &BTreeSet<Constant>,
        i: usize,
        s: &mut Assignment,
        out: &mut BTreeSet<Vec<Constant>>,
    ) {
        if i == q.free.len() {
            if n_sat(d, f, s, rel, universe) {
                out.insert(q.free.iter().map(|v| s[v].clone()).collect());
            }
            return;
        }
        for c in universe {
            s.insert(q.free[i].clone(), c.clone());
            rec(d, q, f, rel, universe, i + 1, s, out);
        }
        s.remove(&q.free[i]);
    }
    rec(d, q, &f, &rel, &universe, 0, &mut s, &mut tuples);
    AnswerSet::for_query(q, tuples)
}

/// Null-aware answers computed through the rewriting `Q^N` and classical evaluation.
pub fn n_answers_rewritten(d: &Instance, q: &ConjunctiveQuery) -> AnswerSet {
    classical_answers(d, &n_rewrite_query(q))
}

/// `d ⊨_N c` evaluated directly on the unrewritten constraint: universal and
/// existential variables that are relevant range over non-null values only,
/// antecedent atoms are looked up, and consequent literals use the null-aware
/// builtin semantics.
pub fn n_holds_direct(d: &Instance, c: &Constraint) -> bool {
    let universe = working_universe(d, &c.constants());
    let rel = c.relevant_vars();
    let mut s = Assignment::new();
    fn forall(
        d: &Instance,
        c: &Constraint,
        rel: &BTreeSet<Var>,
        universe: &BTreeSet<Constant>,
        i: usize,
        s: &mut Assignment,
    ) -> bool {
        if i == c.forall.len() {
            let body = c.body.iter().all(|a| n_literal(d, &Literal::Atom(a.clone()), s));
            return !body || c.head.iter().any(|conj| exists(d, conj, rel, universe, 0, s));
        }
        let v = &c.forall[i];
        for k in universe {
            if rel.contains(v) && k.is_null() {
                continue;
            }
            s.insert(v.clone(), k.clone());
            if !forall(d, c, rel, universe, i + 1, s) {
                return false;
            }
        }
        true
    }
    fn exists(
        d: &Instance,
        conj: &crate::dec::Conjunct,
        rel: &BTreeSet<Var>,
        universe: &BTreeSet<Constant>,
        i: usize,
        s: &mut Assignment,
    ) -> bool {
        if i == conj.exists.len() {
            return conj.literals.iter().all(|l| n_literal(d, l, s));
        }
        let y = &conj.exists[i];
        let mut found = false;
        for k in universe {
            if rel.contains(y) && k.is_null() {
                continue;
            }
            s.insert(y.clone(), k.clone());
            if exists(d, conj, rel, universe, i + 1, s) {
                found = true;
                break;
            }
        }
        s.remove(y);
        found
    }
    forall(d, c, &rel, &universe, 0, &mut s)
}

/// Constraint lookup keyed by source text, for callers that check the same
/// constraints repeatedly.
pub fn compile_all(sigma: &[Constraint]) -> Vec<CompiledConstraint> {
    sigma.iter().map(CompiledConstraint::new).collect()
}

/// Build an assignment from `(variable, constant)` pairs.
pub fn assignment(pairs: &[(&str, &str)]) -> Assignment {
    pairs.iter().map(|(v, c)| (crate::relational::name(v), Constant::new(c))).collect::<BTreeMap<_, _>>()
}
