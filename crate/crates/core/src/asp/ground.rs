//! Grounding of logic programs over their universe, and simplification of
//! the ground program before model search.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::{Serialize, Serializer};

use super::program::{Annotation, BodyLit, LogicProgram, PAtom, RuleKind};
use crate::dec::{Builtin, Term, Var};
use crate::error::{Error, Result};
use crate::nullquery::classical_builtin;
use crate::relational::{Constant, GroundAtom, Name};

/// A ground program atom.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GAtom {
    /// Predicate name.
    pub pred: Name,
    /// Arguments, without the annotation.
    pub args: Vec<Constant>,
    /// Annotation of nickname atoms.
    pub ann: Option<Annotation>,
}

impl GAtom {
    /// Plain ground atom of a database atom.
    pub fn from_ground(a: &GroundAtom) -> GAtom {
        GAtom { pred: a.pred.clone(), args: a.args.clone(), ann: None }
    }

    /// The database atom `R(ā)` underlying `R_(ā,a)` or `R(ā)`.
    pub fn base(&self) -> GroundAtom {
        GroundAtom::from_parts(self.pred.clone(), self.args.clone())
    }
}

impl fmt::Display for GAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut args: Vec<&str> = self.args.iter().map(|c| c.token()).collect();
        if let Some(a) = self.ann {
            args.push(a.token());
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

impl fmt::Debug for GAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for GAtom {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// A ground rule `head ← pos, not neg`; builtins are already evaluated.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroundRule {
    /// Head disjuncts (empty for a constraint).
    pub head: Vec<GAtom>,
    /// Positive body atoms.
    pub pos: Vec<GAtom>,
    /// Default-negated body atoms.
    pub neg: Vec<GAtom>,
}

/// A ground program.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GroundProgram {
    /// Facts.
    pub facts: BTreeSet<GAtom>,
    /// Rules in generation order.
    pub rules: Vec<GroundRule>,
}

impl GroundProgram {
    /// Number of ground rules plus facts.
    pub fn len(&self) -> usize {
        self.facts.len() + self.rules.len()
    }

    /// True when the program has neither facts nor rules.
    pub fn is_empty(&self) -> bool {
        self.facts.is_empty() && self.rules.is_empty()
    }
}

fn ground_fact(a: &PAtom) -> Result<GAtom> {
    let args = a
        .terms
        .iter()
        .map(|t| match t {
            Term::Const(c) => Ok(c.clone()),
            Term::Var(v) => Err(Error::Safety(format!("fact {a} contains the variable {v}"))),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GAtom { pred: a.pred.clone(), args, ann: a.ann })
}

fn instantiate(a: &PAtom, s: &HashMap<Var, Constant>) -> GAtom {
    GAtom {
        pred: a.pred.clone(),
        args: a
            .terms
            .iter()
            .map(|t| match t {
                Term::Const(c) => c.clone(),
                Term::Var(v) => s[v].clone(),
            })
            .collect(),
        ann: a.ann,
    }
}

fn value(t: &Term, s: &HashMap<Var, Constant>) -> Constant {
    match t {
        Term::Const(c) => c.clone(),
        Term::Var(v) => s[v].clone(),
    }
}

/// Classical evaluation of a ground builtin.
fn builtin_true(b: &Builtin, s: &HashMap<Var, Constant>) -> bool {
    match b {
        Builtin::Cmp(op, x, y) => classical_builtin(*op, &value(x, s), &value(y, s)),
        Builtin::IsNull(t) => value(t, s).is_null(),
        Builtin::IsNotNull(t) => !value(t, s).is_null(),
        Builtin::False => false,
    }
}

/// Grounding strategy.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    /// Every variable ranges over the whole universe.
    Full,
    /// Atoms of predicates without defining rules are matched against the facts.
    Join,
}

struct Grounder<'p> {
    prog: &'p LogicProgram,
    facts: BTreeSet<GAtom>,
    base_facts: HashSet<GroundAtom>,
    by_pred: BTreeMap<(Name, bool), Vec<GAtom>>,
    defined: BTreeSet<(Name, bool)>,
    universe: Vec<Constant>,
    cap: u128,
    visited: u128,
    mode: Mode,
}

impl Grounder<'_> {
    fn tick(&mut self) -> Result<()> {
        self.visited += 1;
        if self.visited > self.cap {
            return Err(Error::Resource { what: "ground instantiations".into(), cap: self.cap, required: self.visited });
        }
        Ok(())
    }

    fn is_extensional(&self, a: &PAtom) -> bool {
        !self.defined.contains(&(a.pred.clone(), a.ann.is_some()))
    }

    /// Complete a ground rule from a full substitution, or `None` when a builtin fails.
    fn finish(&self, rule: &super::program::Rule, s: &HashMap<Var, Constant>) -> Option<GroundRule> {
        let mut g = GroundRule { head: Vec::new(), pos: Vec::new(), neg: Vec::new() };
        for l in &rule.body {
            match l {
                BodyLit::Builtin(b) => {
                    if !builtin_true(b, s) {
                        return None;
                    }
                }
                BodyLit::Pos(a) => {
                    let ga = instantiate(a, s);
                    if self.prog.lazy_closed_world && ga.ann == Some(Annotation::FStar) && !self.base_facts.contains(&ga.base())
                    {
                        continue;
                    }
                    if self.mode == Mode::Join && self.is_extensional(a) && !self.facts.contains(&ga) {
                        return None;
                    }
                    g.pos.push(ga);
                }
                BodyLit::Neg(a) => g.neg.push(instantiate(a, s)),
            }
        }
        g.head = rule.head.iter().map(|a| instantiate(a, s)).collect();
        Some(g)
    }

    fn rule(&mut self, rule: &super::program::Rule, out: &mut Vec<GroundRule>) -> Result<()> {
        let vars = rule.vars();
        let mut s: HashMap<Var, Constant> = HashMap::new();
        let joins: Vec<PAtom> = if self.mode == Mode::Join {
            rule.body
                .iter()
                .filter_map(|l| match l {
                    BodyLit::Pos(a) if self.is_extensional(a) => Some(a.clone()),
                    _ => None,
                })
                .collect()
        } else {
            Vec::new()
        };
        self.join(rule, &joins, 0, &vars, &mut s, out)
    }

    fn join(
        &mut self,
        rule: &super::program::Rule,
        joins: &[PAtom],
        i: usize,
        vars: &[Var],
        s: &mut HashMap<Var, Constant>,
        out: &mut Vec<GroundRule>,
    ) -> Result<()> {
        if i == joins.len() {
            let free: Vec<Var> = vars.iter().filter(|v| !s.contains_key(*v)).cloned().collect();
            return self.enumerate(rule, &free, 0, s, out);
        }
        let a = &joins[i];
        let candidates = self.by_pred.get(&(a.pred.clone(), a.ann.is_some())).cloned().unwrap_or_default();
        for f in candidates.iter().filter(|f| f.ann == a.ann && f.args.len() == a.terms.len()) {
            self.tick()?;
            let mut bound = Vec::new();
            let mut ok = true;
            for (t, c) in a.terms.iter().zip(&f.args) {
                match t {
                    Term::Const(k) => ok = k == c,
                    Term::Var(v) => match s.get(v) {
                        Some(x) => ok = x == c,
                        None => {
                            s.insert(v.clone(), c.clone());
                            bound.push(v.clone());
                        }
                    },
                }
                if !ok {
                    break;
                }
            }
            if ok {
                self.join(rule, joins, i + 1, vars, s, out)?;
            }
            for v in bound {
                s.remove(&v);
            }
        }
        Ok(())
    }

    fn enumerate(
        &mut self,
        rule: &super::program::Rule,
        free: &[Var],
        i: usize,
        s: &mut HashMap<Var, Constant>,
        out: &mut Vec<GroundRule>,
    ) -> Result<()> {
        if i == free.len() {
            self.tick()?;
            if let Some(g) = self.finish(rule, s) {
                out.push(g);
            }
            return Ok(());
        }
        for k in 0..self.universe.len() {
            s.insert(free[i].clone(), self.universe[k].clone());
            self.enumerate(rule, free, i + 1, s, out)?;
        }
        s.remove(&free[i]);
        Ok(())
    }
}

fn run(prog: &LogicProgram, cap: u128, mode: Mode) -> Result<GroundProgram> {
    let facts: BTreeSet<GAtom> = prog.facts.iter().map(ground_fact).collect::<Result<_>>()?;
    let base_facts = facts.iter().filter(|f| f.ann.is_none()).map(GAtom::base).collect();
    let mut by_pred: BTreeMap<(Name, bool), Vec<GAtom>> = BTreeMap::new();
    for f in &facts {
        by_pred.entry((f.pred.clone(), f.ann.is_some())).or_default().push(f.clone());
    }
    let defined = prog.rules.iter().flat_map(|r| r.head.iter().map(|h| (h.pred.clone(), h.ann.is_some()))).collect();
    let mut g = Grounder {
        prog,
        facts: facts.clone(),
        base_facts,
        by_pred,
        defined,
        universe: prog.universe.iter().cloned().collect(),
        cap,
        visited: 0,
        mode,
    };
    let mut rules = Vec::new();
    for r in &prog.rules {
        if r.kind == RuleKind::ClosedWorld && prog.lazy_closed_world {
            continue;
        }
        let head_vars: BTreeSet<Var> = r.head.iter().flat_map(|a| a.vars().cloned()).collect();
        let bound = r.bound_vars();
        if let Some(v) = head_vars.iter().find(|v| !bound.contains(*v)) {
            return Err(Error::Safety(format!("head variable {v} is not bound by a positive body atom")));
        }
        g.rule(r, &mut rules)?;
    }
    Ok(GroundProgram { facts, rules })
}

/// All instantiations of the rules over the program universe. Builtins are
/// evaluated classically: a true builtin is dropped and a false one discards
/// the instantiation. With lazy closed-world evaluation the closed-world rules
/// are skipped and an `fs` literal whose base atom is not a fact is dropped as true.
pub fn ground(prog: &LogicProgram, cap: u128) -> Result<GroundProgram> {
    run(prog, cap, Mode::Full)
}

/// Grounding that matches atoms of predicates without defining rules against
/// the facts. It produces the instantiations of [`ground`] whose extensional
/// atoms are facts, which is all the model search needs.
pub fn ground_relevant(prog: &LogicProgram, cap: u128) -> Result<GroundProgram> {
    run(prog, cap, Mode::Join)
}

/// Simplification preserving the stable models: atoms that cannot be derived
/// are false, facts are true, rules with a false body or a true head are
/// removed, and satisfied literals are dropped.
pub fn simplify(g: &GroundProgram) -> GroundProgram {
    let facts = &g.facts;
    let mut possible: HashSet<&GAtom> = facts.iter().collect();
    loop {
        let mut changed = false;
        for r in &g.rules {
            if r.pos.iter().all(|a| possible.contains(a)) {
                for h in &r.head {
                    changed |= possible.insert(h);
                }
            }
        }
        if !changed {
            break;
        }
    }
    let mut rules = Vec::new();
    let mut seen = HashSet::new();
    for r in &g.rules {
        if r.pos.iter().any(|a| !possible.contains(a)) || r.neg.iter().any(|a| facts.contains(a)) {
            continue;
        }
        if r.head.iter().any(|a| facts.contains(a)) {
            continue;
        }
        let mut head: Vec<GAtom> = Vec::new();
        for h in &r.head {
            if !head.contains(h) {
                head.push(h.clone());
            }
        }
        let mut pos: Vec<GAtom> = Vec::new();
        for a in r.pos.iter().filter(|a| !facts.contains(*a)) {
            if !pos.contains(a) {
                pos.push(a.clone());
            }
        }
        let mut neg: Vec<GAtom> = Vec::new();
        for a in r.neg.iter().filter(|a| possible.contains(*a)) {
            if !neg.contains(a) {
                neg.push(a.clone());
            }
        }
        if head.iter().any(|h| pos.contains(h)) {
            continue;
        }
        let rule = GroundRule { head, pos, neg };
        if seen.insert(rule.clone()) {
            rules.push(rule);
        }
    }
    GroundProgram { facts: facts.clone(), rules }
}
