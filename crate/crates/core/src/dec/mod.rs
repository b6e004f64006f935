//! Constraint and query language: terms, atoms, builtins, data exchange
//! constraints of the general form `∀x̄(body → ∨_j ∃ȳ_j C_j)`, conjunctive
//! queries, relevant variables and null-aware rewriting.

mod parse;
mod refacyclic;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::relational::{Constant, Name};

pub use parse::{parse_constraint, parse_query, parse_query_for, ConstraintParser};
pub use refacyclic::{ref_acyclic, RefAcyclicity};

/// Variable identifier.
pub type Var = Name;

/// A term: variable or constant.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Term {
    /// A variable.
    Var(Var),
    /// A constant.
    Const(Constant),
}

impl Term {
    /// Variable term.
    pub fn var(v: &str) -> Term {
        Term::Var(crate::relational::name(v))
    }

    /// Constant term.
    pub fn constant(c: &str) -> Term {
        Term::Const(Constant::new(c))
    }

    /// Variable name when the term is a variable.
    pub fn as_var(&self) -> Option<&Var> {
        match self {
            Term::Var(v) => Some(v),
            Term::Const(_) => None,
        }
    }

    /// True for the constant `null`.
    pub fn is_null_const(&self) -> bool {
        matches!(self, Term::Const(Constant::Null))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => f.write_str(v),
            Term::Const(Constant::Null) => f.write_str("null"),
            Term::Const(c) if c.as_int().is_some() => write!(f, "{c}"),
            Term::Const(c) => write!(f, "\"{c}\""),
        }
    }
}

/// A database atom with terms, `R(t1,...,tn)`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Atom {
    /// Predicate name.
    pub pred: Name,
    /// Argument terms.
    pub terms: Vec<Term>,
}

impl Atom {
    /// Build an atom.
    pub fn new(pred: &str, terms: Vec<Term>) -> Atom {
        Atom { pred: crate::relational::name(pred), terms }
    }

    /// Variables in argument order (with repetitions).
    pub fn vars(&self) -> impl Iterator<Item = &Var> {
        self.terms.iter().filter_map(Term::as_var)
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.pred)?;
        if !self.terms.is_empty() {
            f.write_str("(")?;
            for (i, t) in self.terms.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{t}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

/// Comparison operators.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum CmpOp {
    /// `=`
    Eq,
    /// `!=`
    Neq,
    /// `<`
    Lt,
    /// `<=`
    Leq,
    /// `>`
    Gt,
    /// `>=`
    Geq,
}

impl CmpOp {
    /// Concrete syntax.
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Neq => "!=",
            CmpOp::Lt => "<",
            CmpOp::Leq => "<=",
            CmpOp::Gt => ">",
            CmpOp::Geq => ">=",
        }
    }

    /// Complementary operator.
    pub fn negate(self) -> CmpOp {
        match self {
            CmpOp::Eq => CmpOp::Neq,
            CmpOp::Neq => CmpOp::Eq,
            CmpOp::Lt => CmpOp::Geq,
            CmpOp::Leq => CmpOp::Gt,
            CmpOp::Gt => CmpOp::Leq,
            CmpOp::Geq => CmpOp::Lt,
        }
    }
}

/// Builtin atoms.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Builtin {
    /// Binary comparison.
    Cmp(CmpOp, Term, Term),
    /// `isnull(t)`
    IsNull(Term),
    /// `isnotnull(t)`
    IsNotNull(Term),
    /// The always-false atom.
    False,
}

impl Builtin {
    /// Terms mentioned by the builtin.
    pub fn terms(&self) -> Vec<&Term> {
        match self {
            Builtin::Cmp(_, a, b) => vec![a, b],
            Builtin::IsNull(t) | Builtin::IsNotNull(t) => vec![t],
            Builtin::False => vec![],
        }
    }

    /// Classical negation as a builtin; `None` stands for `true`.
    pub fn negate(&self) -> Option<Builtin> {
        match self {
            Builtin::Cmp(op, a, b) => Some(Builtin::Cmp(op.negate(), a.clone(), b.clone())),
            Builtin::IsNull(t) => Some(Builtin::IsNotNull(t.clone())),
            Builtin::IsNotNull(t) => Some(Builtin::IsNull(t.clone())),
            Builtin::False => None,
        }
    }

    /// True for the null-guard shapes that do not count towards relevance:
    /// `isnull(v)`, `isnotnull(v)`, `v θ null`, `null θ v`.
    pub fn is_null_guard(&self) -> bool {
        match self {
            Builtin::IsNull(_) | Builtin::IsNotNull(_) => true,
            Builtin::Cmp(_, a, b) => a.is_null_const() || b.is_null_const(),
            Builtin::False => false,
        }
    }
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Builtin::Cmp(op, a, b) => write!(f, "{a}{}{b}", op.symbol()),
            Builtin::IsNull(t) => write!(f, "isnull({t})"),
            Builtin::IsNotNull(t) => write!(f, "isnotnull({t})"),
            Builtin::False => f.write_str("false"),
        }
    }
}

/// A literal of a conjunction: database atom or builtin.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Literal {
    /// Database atom.
    Atom(Atom),
    /// Builtin atom.
    Builtin(Builtin),
}

impl Literal {
    /// Variables mentioned, with repetitions.
    pub fn vars(&self) -> Vec<&Var> {
        match self {
            Literal::Atom(a) => a.vars().collect(),
            Literal::Builtin(b) => b.terms().into_iter().filter_map(Term::as_var).collect(),
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Atom(a) => write!(f, "{a}"),
            Literal::Builtin(b) => write!(f, "{b}"),
        }
    }
}

/// One disjunct of a constraint consequent: `∃ȳ (l1 ∧ ... ∧ lk)`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Conjunct {
    /// Existentially quantified variables ȳ.
    pub exists: Vec<Var>,
    /// Database and builtin literals.
    pub literals: Vec<Literal>,
}

impl Conjunct {
    /// Database atoms of the conjunct.
    pub fn atoms(&self) -> impl Iterator<Item = &Atom> {
        self.literals.iter().filter_map(|l| match l {
            Literal::Atom(a) => Some(a),
            Literal::Builtin(_) => None,
        })
    }

    /// Builtins of the conjunct.
    pub fn builtins(&self) -> impl Iterator<Item = &Builtin> {
        self.literals.iter().filter_map(|l| match l {
            Literal::Builtin(b) => Some(b),
            Literal::Atom(_) => None,
        })
    }

    /// True when the conjunct has only builtins and no existentials.
    pub fn is_builtin_only(&self) -> bool {
        self.exists.is_empty() && self.literals.iter().all(|l| matches!(l, Literal::Builtin(_)))
    }
}

impl fmt::Display for Conjunct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.exists.is_empty() {
            write!(f, "exists {}: ", join(&self.exists, ","))?;
        }
        for (i, l) in self.literals.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

/// Derived classification of a constraint.
#[derive(Clone, Copy, PartialEq, Eq, Debug, PartialOrd, Ord, Hash)]
pub enum Kind {
    /// Universal data exchange constraint (no existentials).
    Udec,
    /// Referential data exchange constraint (existentials present).
    Rdec,
    /// Local integrity constraint (owner pair `(P,P)`).
    LocalIc,
}

/// A constraint `∀x̄(R1(x̄1) ∧ ... ∧ Rn(x̄n) → C1 ∨ ... ∨ Cm)`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Constraint {
    /// Owner pair `(P,Q)` when the constraint belongs to `Σ(P,Q)`.
    pub owner: Option<(Name, Name)>,
    /// Universally quantified variables x̄ (declared ones first, then implicit
    /// antecedent variables in order of first occurrence).
    pub forall: Vec<Var>,
    /// Antecedent atoms.
    pub body: Vec<Atom>,
    /// Consequent disjuncts.
    pub head: Vec<Conjunct>,
}

impl Constraint {
    /// Parse constraint text (see [`parse_constraint`]).
    pub fn parse(text: &str) -> crate::Result<Constraint> {
        parse_constraint(text)
    }

    /// Derived kind.
    pub fn kind(&self) -> Kind {
        match &self.owner {
            Some((p, q)) if p == q => Kind::LocalIc,
            _ if self.is_existential() => Kind::Rdec,
            _ => Kind::Udec,
        }
    }

    /// True when some disjunct has existential variables.
    pub fn is_existential(&self) -> bool {
        self.head.iter().any(|c| !c.exists.is_empty())
    }

    /// Predicates occurring anywhere in the constraint.
    pub fn predicates(&self) -> BTreeSet<Name> {
        self.body
            .iter()
            .chain(self.head.iter().flat_map(|c| c.atoms()))
            .map(|a| a.pred.clone())
            .collect()
    }

    /// Constants occurring anywhere in the constraint.
    pub fn constants(&self) -> BTreeSet<Constant> {
        let mut out = BTreeSet::new();
        let mut add = |t: &Term| {
            if let Term::Const(c) = t {
                out.insert(c.clone());
            }
        };
        for a in &self.body {
            a.terms.iter().for_each(&mut add);
        }
        for c in &self.head {
            for l in &c.literals {
                match l {
                    Literal::Atom(a) => a.terms.iter().for_each(&mut add),
                    Literal::Builtin(b) => b.terms().into_iter().for_each(&mut add),
                }
            }
        }
        out
    }

    /// Builtin-only disjuncts (the φ part of the consequent).
    pub fn builtin_disjuncts(&self) -> impl Iterator<Item = &Conjunct> {
        self.head.iter().filter(|c| c.is_builtin_only())
    }

    /// Disjuncts that contain database atoms.
    pub fn atom_disjuncts(&self) -> impl Iterator<Item = &Conjunct> {
        self.head.iter().filter(|c| !c.is_builtin_only())
    }

    /// Definition-file line `dec P Q : ...` when an owner is set.
    pub fn to_definition(&self) -> String {
        match &self.owner {
            Some((p, q)) => format!("dec {p} {q} : {self}"),
            None => self.to_string(),
        }
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.forall.is_empty() {
            write!(f, "forall {}: ", join(&self.forall, ","))?;
        }
        for (i, a) in self.body.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str(" -> ")?;
        for (i, c) in self.head.iter().enumerate() {
            if i > 0 {
                f.write_str(" or ")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// A conjunctive query `Q(x̄): ∃ȳ (l1 ∧ ... ∧ lk)`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct ConjunctiveQuery {
    /// Free variables in order of first occurrence.
    pub free: Vec<Var>,
    /// Existential variables.
    pub exists: Vec<Var>,
    /// Database and builtin literals.
    pub literals: Vec<Literal>,
}

impl ConjunctiveQuery {
    /// Parse query text (see [`parse_query`]).
    pub fn parse(text: &str) -> crate::Result<ConjunctiveQuery> {
        parse_query(text)
    }

    /// True for Boolean queries.
    pub fn is_boolean(&self) -> bool {
        self.free.is_empty()
    }

    /// Membership in the SQL-compatible class: no comparison with an explicit `null`.
    pub fn sql_safe(&self) -> bool {
        !self.literals.iter().any(|l| {
            matches!(l, Literal::Builtin(Builtin::Cmp(_, a, b)) if a.is_null_const() || b.is_null_const())
        })
    }

    /// Constants mentioned by the query.
    pub fn constants(&self) -> BTreeSet<Constant> {
        let mut out = BTreeSet::new();
        for l in &self.literals {
            let terms: Vec<&Term> = match l {
                Literal::Atom(a) => a.terms.iter().collect(),
                Literal::Builtin(b) => b.terms(),
            };
            for t in terms {
                if let Term::Const(c) = t {
                    out.insert(c.clone());
                }
            }
        }
        out
    }

    /// Database atoms of the query.
    pub fn atoms(&self) -> impl Iterator<Item = &Atom> {
        self.literals.iter().filter_map(|l| match l {
            Literal::Atom(a) => Some(a),
            Literal::Builtin(_) => None,
        })
    }
}

impl fmt::Display for ConjunctiveQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.exists.is_empty() {
            write!(f, "exists {}: ", join(&self.exists, ","))?;
        }
        for (i, l) in self.literals.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

fn join(vars: &[Var], sep: &str) -> String {
    vars.iter().map(|v| v.as_ref()).collect::<Vec<_>>().join(sep)
}

fn count_occurrences<'a>(lits: impl Iterator<Item = &'a Literal>, counts: &mut BTreeMap<Var, usize>) {
    for l in lits {
        match l {
            Literal::Atom(a) => {
                for v in a.vars() {
                    *counts.entry(v.clone()).or_default() += 1;
                }
            }
            Literal::Builtin(b) if b.is_null_guard() => {}
            Literal::Builtin(b) => {
                for t in b.terms() {
                    if let Term::Var(v) = t {
                        *counts.entry(v.clone()).or_default() += 1;
                    }
                }
            }
        }
    }
}

/// Anything that has a set of relevant variables.
pub trait Relevance {
    /// Variables occurring at least twice outside quantifier prefixes and null guards.
    fn relevant_vars(&self) -> BTreeSet<Var>;
}

impl Relevance for Constraint {
    fn relevant_vars(&self) -> BTreeSet<Var> {
        let mut counts = BTreeMap::new();
        let body: Vec<Literal> = self.body.iter().cloned().map(Literal::Atom).collect();
        count_occurrences(body.iter(), &mut counts);
        count_occurrences(self.head.iter().flat_map(|c| c.literals.iter()), &mut counts);
        counts.into_iter().filter(|(_, n)| *n >= 2).map(|(v, _)| v).collect()
    }
}

impl Relevance for ConjunctiveQuery {
    fn relevant_vars(&self) -> BTreeSet<Var> {
        let mut counts = BTreeMap::new();
        count_occurrences(self.literals.iter(), &mut counts);
        counts.into_iter().filter(|(_, n)| *n >= 2).map(|(v, _)| v).collect()
    }
}

/// Relevant variables of a constraint or query.
pub fn relevant_vars<F: Relevance>(f: &F) -> BTreeSet<Var> {
    f.relevant_vars()
}

/// Null-aware rewriting `ψ ↦ ψ^N` of a constraint: the consequent gains a
/// disjunct `isnull(v)` for every relevant universal variable, and every
/// disjunct gains `isnotnull(w)` for its relevant existential variables.
/// Guards already present are not duplicated, so the rewriting is a fixpoint
/// after one application.
pub fn n_rewrite_constraint(c: &Constraint) -> Constraint {
    let rel = c.relevant_vars();
    let mut head = Vec::new();
    for v in &c.forall {
        if !rel.contains(v) {
            continue;
        }
        let guard = Conjunct { exists: vec![], literals: vec![Literal::Builtin(Builtin::IsNull(Term::Var(v.clone())))] };
        if !c.head.contains(&guard) {
            head.push(guard);
        }
    }
    for conj in &c.head {
        let mut conj = conj.clone();
        for w in conj.exists.clone() {
            if rel.contains(&w) && !c.forall.contains(&w) {
                let g = Literal::Builtin(Builtin::IsNotNull(Term::Var(w.clone())));
                if !conj.literals.contains(&g) {
                    conj.literals.push(g);
                }
            }
        }
        head.push(conj);
    }
    Constraint { owner: c.owner.clone(), forall: c.forall.clone(), body: c.body.clone(), head }
}

/// Null-aware rewriting of a conjunctive query: appends `v != null` for every
/// relevant variable (in order of first occurrence), skipping guards already present.
pub fn n_rewrite_query(q: &ConjunctiveQuery) -> ConjunctiveQuery {
    let rel = q.relevant_vars();
    let mut seen = BTreeSet::new();
    let mut order = Vec::new();
    for l in &q.literals {
        for v in l.vars() {
            if rel.contains(v) && seen.insert(v.clone()) {
                order.push(v.clone());
            }
        }
    }
    let mut out = q.clone();
    for v in order {
        let g = Literal::Builtin(Builtin::Cmp(CmpOp::Neq, Term::Var(v), Term::Const(Constant::Null)));
        if !out.literals.contains(&g) {
            out.literals.push(g);
        }
    }
    out
}
