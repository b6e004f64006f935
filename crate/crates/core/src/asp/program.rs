//! Annotated logic programs and the generation of a peer's solution program.
//!
//! Every predicate `R` that the peer may change gets a nickname `R_` with one
//! extra argument carrying an [`Annotation`]. Rules repair violations of the
//! peer's constraints by inserting (`ta`) or deleting (`fa`) tuples, the
//! annotation rules close `ts`/`fs` over the original facts, and the
//! interpretation rules collect the final tuples of the peer (`tss`).

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::dec::{Atom, Builtin, CmpOp, ConjunctiveQuery, Constraint, Literal, Relevance, Term, Var};
use crate::error::{Error, Result};
use crate::pdes::{inc_marker, Pdes};
use crate::relational::{name, Constant, GroundAtom, Instance, Name};

/// Annotation constants of the nicknamed predicates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Annotation {
    /// The tuple is inserted.
    Ta,
    /// The tuple is deleted.
    Fa,
    /// The tuple is true: an original fact or inserted.
    TStar,
    /// The tuple is false: absent originally or deleted.
    FStar,
    /// The tuple belongs to the final instance of the peer.
    TStarStar,
}

impl Annotation {
    /// All annotations.
    pub const ALL: [Annotation; 5] =
        [Annotation::Ta, Annotation::Fa, Annotation::TStar, Annotation::FStar, Annotation::TStarStar];

    /// Constant used in program text.
    pub fn token(self) -> &'static str {
        match self {
            Annotation::Ta => "ta",
            Annotation::Fa => "fa",
            Annotation::TStar => "ts",
            Annotation::FStar => "fs",
            Annotation::TStarStar => "tss",
        }
    }

    /// Inverse of [`Annotation::token`].
    pub fn from_token(s: &str) -> Option<Annotation> {
        Annotation::ALL.into_iter().find(|a| a.token() == s)
    }
}

/// A program atom: a plain atom `R(t̄)` or an annotated nickname atom `R_(t̄, a)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PAtom {
    /// Predicate name.
    pub pred: Name,
    /// Arguments, without the annotation.
    pub terms: Vec<Term>,
    /// Annotation for nickname atoms.
    pub ann: Option<Annotation>,
}

impl PAtom {
    /// Plain atom.
    pub fn plain(pred: &Name, terms: Vec<Term>) -> PAtom {
        PAtom { pred: pred.clone(), terms, ann: None }
    }

    /// Annotated nickname atom.
    pub fn annotated(pred: &Name, terms: Vec<Term>, ann: Annotation) -> PAtom {
        PAtom { pred: pred.clone(), terms, ann: Some(ann) }
    }

    /// Variables in argument order.
    pub fn vars(&self) -> impl Iterator<Item = &Var> {
        self.terms.iter().filter_map(Term::as_var)
    }
}

impl fmt::Display for PAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut args: Vec<String> = self.terms.iter().map(|t| t.to_string()).collect();
        if let Some(a) = self.ann {
            args.push(a.token().to_string());
            write!(f, "{}_", self.pred)?;
        } else {
            f.write_str(&self.pred)?;
        }
        if !args.is_empty() {
            write!(f, "({})", args.join(","))?;
        }
        Ok(())
    }
}

/// A body literal.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BodyLit {
    /// Positive atom.
    Pos(PAtom),
    /// Atom under default negation.
    Neg(PAtom),
    /// Builtin, evaluated classically at grounding time.
    Builtin(Builtin),
}

/// Origin of a rule, used for reporting and lazy grounding.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum RuleKind {
    /// Repair rule for a universal constraint.
    Universal,
    /// Repair rule for a referential constraint.
    Referential,
    /// Definition of an auxiliary predicate of a referential constraint.
    Auxiliary,
    /// Closed-world rule `R_(x̄,fs) ← dom(x̄), not R(x̄)`; grounded lazily.
    ClosedWorld,
    /// Annotation closure rule.
    Annotation,
    /// Coherence constraint `← R_(x̄,ta), R_(x̄,fa)`.
    Coherence,
    /// Interpretation rule for `tss`.
    Interpretation,
    /// Query rule.
    Query,
    /// A rule read from program text.
    Parsed,
}

/// A disjunctive rule `h1 ∨ ... ∨ hk ← body`; an empty head is a program constraint.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    /// Head disjuncts.
    pub head: Vec<PAtom>,
    /// Body literals in textual order.
    pub body: Vec<BodyLit>,
    /// Origin.
    pub kind: RuleKind,
}

impl Rule {
    /// Variables in order of first occurrence, head first.
    pub fn vars(&self) -> Vec<Var> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        let mut add = |v: &Var| {
            if seen.insert(v.clone()) {
                out.push(v.clone());
            }
        };
        for a in &self.head {
            a.vars().for_each(&mut add);
        }
        for l in &self.body {
            match l {
                BodyLit::Pos(a) | BodyLit::Neg(a) => a.vars().for_each(&mut add),
                BodyLit::Builtin(b) => b.terms().into_iter().filter_map(Term::as_var).for_each(&mut add),
            }
        }
        out
    }

    /// Variables bound by positive body atoms.
    pub fn bound_vars(&self) -> BTreeSet<Var> {
        self.body
            .iter()
            .filter_map(|l| match l {
                BodyLit::Pos(a) => Some(a.vars().cloned().collect::<Vec<_>>()),
                _ => None,
            })
            .flatten()
            .collect()
    }
}

/// A logic program: ground facts plus rules over a finite universe.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LogicProgram {
    /// Ground facts in emission order.
    pub facts: Vec<PAtom>,
    /// Rules in emission order.
    pub rules: Vec<Rule>,
    /// Constants the variables range over.
    pub universe: BTreeSet<Constant>,
    /// Evaluate `fs` literals by fact lookup instead of grounding the closed-world rules.
    pub lazy_closed_world: bool,
    /// Observations made during generation (empty heads, ref-cycles).
    pub warnings: Vec<String>,
}

/// Name of the domain predicate.
pub const DOM: &str = "dom";
/// Name of the answer predicate of query programs.
pub const ANS: &str = "ans";

fn const_term(c: &Constant) -> Term {
    Term::Const(c.clone())
}

fn null_guard(v: &Var) -> BodyLit {
    BodyLit::Builtin(Builtin::Cmp(CmpOp::Neq, Term::Var(v.clone()), Term::Const(Constant::Null)))
}

fn ground_patom(a: &GroundAtom) -> PAtom {
    PAtom::plain(&a.pred, a.args.iter().map(const_term).collect())
}

/// Context of a generation run.
struct Gen<'a> {
    changeable: &'a BTreeSet<Name>,
    fixed: &'a BTreeSet<Name>,
}

impl Gen<'_> {
    /// `R_(t̄,ts)` for a changeable predicate, `R(t̄)` for a fixed one.
    fn true_star(&self, a: &Atom) -> PAtom {
        if self.fixed.contains(&a.pred) {
            PAtom::plain(&a.pred, a.terms.clone())
        } else {
            PAtom::annotated(&a.pred, a.terms.clone(), Annotation::TStar)
        }
    }

    /// `R_(t̄,fs)` for a changeable predicate, `not R(t̄)` for a fixed one.
    fn false_star(&self, a: &Atom) -> BodyLit {
        if self.fixed.contains(&a.pred) {
            BodyLit::Neg(PAtom::plain(&a.pred, a.terms.clone()))
        } else {
            BodyLit::Pos(PAtom::annotated(&a.pred, a.terms.clone(), Annotation::FStar))
        }
    }

    fn changes(&self, pred: &Name) -> bool {
        self.changeable.contains(pred)
    }
}

/// The simple referential shape `body → φ ∨ ∃ȳ Q(x̄′,ȳ)` with `φ` builtin-only.
struct Referential<'c> {
    target: &'c Atom,
    exists: &'c [Var],
    builtin_disjuncts: Vec<&'c crate::dec::Conjunct>,
}

fn referential_shape(c: &Constraint) -> Result<Referential<'_>> {
    let refuse = |why: &str| Error::Refused(format!("constraint `{c}` is outside the referential shape supported by the solution program: {why}"));
    let ex: Vec<_> = c.head.iter().filter(|d| !d.exists.is_empty()).collect();
    if ex.len() != 1 {
        return Err(refuse("exactly one existential disjunct is required"));
    }
    let d = ex[0];
    let atoms: Vec<&Atom> = d.atoms().collect();
    if atoms.len() != 1 || d.literals.len() != 1 {
        return Err(refuse("the existential disjunct must be a single atom without builtins"));
    }
    let others: Vec<_> = c.head.iter().filter(|x| x.exists.is_empty()).collect();
    if others.iter().any(|x| !x.is_builtin_only()) {
        return Err(refuse("the other disjuncts must be builtin-only"));
    }
    let target = atoms[0];
    for y in &d.exists {
        if target.vars().filter(|v| *v == y).count() != 1 {
            return Err(refuse("each existential variable must occur exactly once"));
        }
    }
    let body_vars: BTreeSet<&Var> = c.body.iter().flat_map(|a| a.vars()).collect();
    if target.vars().any(|v| !d.exists.contains(v) && !body_vars.contains(v)) {
        return Err(refuse("the non-existential variables of the target atom must occur in the antecedent"));
    }
    Ok(Referential { target, exists: &d.exists, builtin_disjuncts: others })
}

/// Cartesian product of the literal choices of a list of disjuncts (CNF clauses).
fn clauses<'l>(disjuncts: &[&'l [Literal]]) -> Vec<Vec<&'l Literal>> {
    let mut out: Vec<Vec<&Literal>> = vec![Vec::new()];
    for lits in disjuncts {
        let mut next = Vec::new();
        for prefix in &out {
            for l in lits.iter() {
                let mut c = prefix.clone();
                if !c.contains(&l) {
                    c.push(l);
                }
                next.push(c);
            }
        }
        out = next;
    }
    out
}

/// Universals missing from the antecedent get a `dom(v)` atom so that every rule is safe.
fn domain_atoms(c: &Constraint) -> Vec<BodyLit> {
    let body_vars: BTreeSet<&Var> = c.body.iter().flat_map(|a| a.vars()).collect();
    c.forall
        .iter()
        .filter(|v| !body_vars.contains(v))
        .map(|v| BodyLit::Pos(PAtom::plain(&name(DOM), vec![Term::Var(v.clone())])))
        .collect()
}

fn fresh_aux(taken: &BTreeSet<String>, counter: &mut usize) -> Name {
    loop {
        *counter += 1;
        let n = format!("aux{counter}");
        if !taken.contains(&n) {
            return name(&n);
        }
    }
}

/// Build the solution program of peer `p` over the neighborhood instance `dbar`.
///
/// Constraints toward a peer whose `inc` marker occurs in `dbar` receive a
/// `not inc_Q` literal, so they never fire. Predicates of peers that `p`
/// trusts more keep their plain names and receive no annotation rules.
pub fn build_solution_program(pdes: &Pdes, p: &str, dbar: &Instance) -> Result<LogicProgram> {
    let s = &pdes.schema;
    let neighborhood = s.neighbors(p)?;
    let npreds = s.neighborhood_preds(p)?;
    let fixed: BTreeSet<Name> = s.fixed_preds(p).intersection(&npreds).cloned().collect();
    let changeable: BTreeSet<Name> = npreds.difference(&fixed).cloned().collect();
    let own = s.preds_of(p);
    let sigma: Vec<(Name, &Constraint)> =
        s.sigma_of(p).into_iter().filter(|(q, _)| neighborhood.contains(q)).collect();
    for a in dbar.iter() {
        if !npreds.contains(&a.pred) && !a.args.is_empty() {
            return Err(Error::Schema(format!("atom {a} is outside the neighborhood schema of {p}")));
        }
    }
    let gen = Gen { changeable: &changeable, fixed: &fixed };

    let mut universe = dbar.active_domain();
    for (_, c) in &sigma {
        universe.extend(c.constants());
    }
    universe.insert(Constant::Null);

    let dom = name(DOM);
    let mut facts: Vec<PAtom> = universe.iter().map(|c| PAtom::plain(&dom, vec![const_term(c)])).collect();
    facts.extend(dbar.iter().map(ground_patom));

    let taken: BTreeSet<String> = npreds.iter().map(|n| n.to_lowercase()).collect();
    let mut aux_counter = 0usize;
    let mut rules = Vec::new();
    let mut warnings = Vec::new();

    for (idx, (q, c)) in sigma.iter().enumerate() {
        let inc_guard: Vec<BodyLit> = if q.as_ref() != p && dbar.contains(&inc_marker(q)) {
            vec![BodyLit::Neg(ground_patom(&inc_marker(q)))]
        } else {
            Vec::new()
        };
        let rel = c.relevant_vars();
        let guards: Vec<BodyLit> = c.forall.iter().filter(|v| rel.contains(*v)).map(null_guard).collect();
        let body_true: Vec<BodyLit> = c.body.iter().map(|a| BodyLit::Pos(gen.true_star(a))).collect();
        let deletions: Vec<PAtom> = c
            .body
            .iter()
            .filter(|a| gen.changes(&a.pred))
            .map(|a| PAtom::annotated(&a.pred, a.terms.clone(), Annotation::Fa))
            .collect();
        let dom_atoms = domain_atoms(c);
        let mut push = |head: Vec<PAtom>, body: Vec<BodyLit>, kind: RuleKind, rules: &mut Vec<Rule>| {
            let mut h: Vec<PAtom> = Vec::new();
            for a in head {
                if !h.contains(&a) {
                    h.push(a);
                }
            }
            let mut b: Vec<BodyLit> = Vec::new();
            for l in body {
                if !b.contains(&l) {
                    b.push(l);
                }
            }
            if h.is_empty() && matches!(kind, RuleKind::Universal | RuleKind::Referential) {
                warnings.push(format!(
                    "constraint {} of {p} (`{c}`) yields a rule with an empty head after trust filtering",
                    idx + 1
                ));
            }
            rules.push(Rule { head: h, body: b, kind });
        };

        if !c.is_existential() {
            let disjuncts: Vec<&[Literal]> = c.head.iter().map(|d| d.literals.as_slice()).collect();
            for clause in clauses(&disjuncts) {
                let mut head = deletions.clone();
                let mut body = body_true.clone();
                let mut negated = Vec::new();
                for l in clause {
                    match l {
                        Literal::Atom(a) => {
                            if gen.changes(&a.pred) {
                                head.push(PAtom::annotated(&a.pred, a.terms.clone(), Annotation::Ta));
                            }
                            body.push(gen.false_star(a));
                        }
                        Literal::Builtin(b) => {
                            if let Some(nb) = b.negate() {
                                negated.push(BodyLit::Builtin(nb));
                            }
                        }
                    }
                }
                body.extend(dom_atoms.iter().cloned());
                body.extend(negated);
                body.extend(guards.iter().cloned());
                body.extend(inc_guard.iter().cloned());
                push(head, body, RuleKind::Universal, &mut rules);
            }
        } else {
            let shape = referential_shape(c)?;
            let t = shape.target;
            let xprime: Vec<Var> = {
                let mut seen = BTreeSet::new();
                t.vars().filter(|v| !shape.exists.contains(v) && seen.insert((*v).clone())).cloned().collect()
            };
            let null_terms: Vec<Term> = t
                .terms
                .iter()
                .map(|x| match x {
                    Term::Var(v) if shape.exists.contains(v) => Term::Const(Constant::Null),
                    other => other.clone(),
                })
                .collect();
            let aux = fresh_aux(&taken, &mut aux_counter);
            let aux_atom = PAtom::plain(&aux, xprime.iter().map(|v| Term::Var(v.clone())).collect());
            let xprime_guards: Vec<BodyLit> = xprime.iter().map(null_guard).collect();
            let changes_target = gen.changes(&t.pred);

            let disjuncts: Vec<&[Literal]> = shape.builtin_disjuncts.iter().map(|d| d.literals.as_slice()).collect();
            for clause in clauses(&disjuncts) {
                let mut head = deletions.clone();
                if changes_target {
                    head.push(PAtom::annotated(&t.pred, null_terms.clone(), Annotation::Ta));
                }
                let mut body = body_true.clone();
                body.extend(dom_atoms.iter().cloned());
                body.push(BodyLit::Neg(aux_atom.clone()));
                for l in clause {
                    if let Literal::Builtin(b) = l {
                        if let Some(nb) = b.negate() {
                            body.push(BodyLit::Builtin(nb));
                        }
                    }
                }
                body.extend(guards.iter().cloned());
                body.extend(inc_guard.iter().cloned());
                push(head, body, RuleKind::Referential, &mut rules);
            }
            let not_deleted = |terms: &[Term]| -> Vec<BodyLit> {
                if changes_target {
                    vec![BodyLit::Neg(PAtom::annotated(&t.pred, terms.to_vec(), Annotation::Fa))]
                } else {
                    Vec::new()
                }
            };
            for y in shape.exists {
                let mut body = vec![BodyLit::Pos(gen.true_star(t))];
                body.extend(not_deleted(&t.terms));
                body.extend(xprime_guards.iter().cloned());
                body.push(null_guard(y));
                push(vec![aux_atom.clone()], body, RuleKind::Auxiliary, &mut rules);
            }
            let mut body = vec![BodyLit::Pos(PAtom::plain(&t.pred, null_terms.clone()))];
            body.extend(not_deleted(&null_terms));
            body.extend(xprime_guards.iter().cloned());
            push(vec![aux_atom.clone()], body, RuleKind::Auxiliary, &mut rules);
        }
    }

    let arity = |pred: &Name| -> usize {
        s.owner_of(pred)
            .and_then(|o| s.schemas.get(o))
            .and_then(|sc| sc.get(pred))
            .map(|sym| sym.arity)
            .unwrap_or(0)
    };
    let xs = |n: usize| -> Vec<Term> { (1..=n).map(|i| Term::var(&format!("x{i}"))).collect() };
    let mut closure = Vec::new();
    let mut coherence = Vec::new();
    let mut interpretation = Vec::new();
    for r in &changeable {
        let x = xs(arity(r));
        let ann = |a: Annotation| PAtom::annotated(r, x.clone(), a);
        let dom_body: Vec<BodyLit> =
            x.iter().map(|t| BodyLit::Pos(PAtom::plain(&dom, vec![t.clone()]))).collect();
        let mut cwa = dom_body;
        cwa.push(BodyLit::Neg(PAtom::plain(r, x.clone())));
        closure.push(Rule { head: vec![ann(Annotation::FStar)], body: cwa, kind: RuleKind::ClosedWorld });
        closure.push(Rule {
            head: vec![ann(Annotation::FStar)],
            body: vec![BodyLit::Pos(ann(Annotation::Fa))],
            kind: RuleKind::Annotation,
        });
        closure.push(Rule {
            head: vec![ann(Annotation::TStar)],
            body: vec![BodyLit::Pos(PAtom::plain(r, x.clone()))],
            kind: RuleKind::Annotation,
        });
        closure.push(Rule {
            head: vec![ann(Annotation::TStar)],
            body: vec![BodyLit::Pos(ann(Annotation::Ta))],
            kind: RuleKind::Annotation,
        });
        coherence.push(Rule {
            head: vec![],
            body: vec![BodyLit::Pos(ann(Annotation::Ta)), BodyLit::Pos(ann(Annotation::Fa))],
            kind: RuleKind::Coherence,
        });
        if own.contains(r) {
            interpretation.push(Rule {
                head: vec![ann(Annotation::TStarStar)],
                body: vec![BodyLit::Pos(ann(Annotation::TStar)), BodyLit::Neg(ann(Annotation::Fa))],
                kind: RuleKind::Interpretation,
            });
        }
    }
    rules.extend(closure);
    rules.extend(coherence);
    rules.extend(interpretation);

    let ra = crate::dec::ref_acyclic(sigma.iter().map(|(_, c)| *c));
    if !ra.acyclic {
        let w: Vec<&str> = ra.cycle.iter().map(|n| n.as_ref()).collect();
        warnings.push(format!(
            "the constraints of {p} are not ref-acyclic (cycle {}); stable models may include non-minimal solutions",
            w.join(" -> ")
        ));
    }

    Ok(LogicProgram { facts, rules, universe, lazy_closed_world: true, warnings })
}

/// Query rule `ans(x̄) ← ...` over the `tss` atoms of the peer, built from the
/// null-aware rewriting of `q`. Constants of the query join the universe.
pub fn add_query_rule(prog: &mut LogicProgram, pdes: &Pdes, p: &str, q: &ConjunctiveQuery) -> Result<()> {
    let own = pdes.schema.preds_of(p);
    let rq = crate::dec::n_rewrite_query(q);
    let mut body = Vec::new();
    for l in &rq.literals {
        match l {
            Literal::Atom(a) => {
                if !own.contains(&a.pred) {
                    return Err(Error::Schema(format!("query predicate {} is not in the schema of {p}", a.pred)));
                }
                body.push(BodyLit::Pos(PAtom::annotated(&a.pred, a.terms.clone(), Annotation::TStarStar)));
            }
            Literal::Builtin(b) => body.push(BodyLit::Builtin(b.clone())),
        }
    }
    let head = PAtom::plain(&name(ANS), rq.free.iter().map(|v| Term::Var(v.clone())).collect());
    let bound: BTreeSet<Var> =
        rq.atoms().flat_map(|a| a.vars().cloned().collect::<Vec<_>>()).collect();
    for v in rq.free.iter().chain(rq.exists.iter()) {
        if !bound.contains(v) {
            body.push(BodyLit::Pos(PAtom::plain(&name(DOM), vec![Term::Var(v.clone())])));
        }
    }
    for c in q.constants() {
        if prog.universe.insert(c.clone()) {
            let dom_fact = PAtom::plain(&name(DOM), vec![const_term(&c)]);
            let pos = prog.facts.iter().take_while(|f| f.pred.as_ref() == DOM && f < &&dom_fact).count();
            prog.facts.insert(pos, dom_fact);
        }
    }
    prog.rules.push(Rule { head: vec![head], body, kind: RuleKind::Query });
    Ok(())
}
