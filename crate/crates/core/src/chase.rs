//! The restricted chase: a null-propagating saturation of an instance under
//! the constraints whose existential variables are neither joined nor
//! compared. Its result bounds the insertions a null-based repair may make.

use std::collections::BTreeSet;

use crate::dec::{Constraint, Literal, Relevance, Term};
use crate::nullquery::{builtin_holds, working_universe, Binding, CConstraint, CTerm};
use crate::relational::{Constant, GroundAtom, Instance};

/// Partition of a constraint set for the chase.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SigmaSplit {
    /// Constraints without existential variables.
    pub sigma1: Vec<Constraint>,
    /// Existential constraints whose existentials occur once and never in a builtin.
    pub sigma2_minus: Vec<Constraint>,
    /// Existential constraints with joined or compared existentials.
    pub excluded: Vec<Constraint>,
}

impl SigmaSplit {
    /// The constraints the chase applies.
    pub fn chased(&self) -> impl Iterator<Item = &Constraint> {
        self.sigma1.iter().chain(self.sigma2_minus.iter())
    }
}

fn problematic(c: &Constraint) -> bool {
    c.head.iter().any(|conj| {
        conj.exists.iter().any(|y| {
            let mut occurrences = 0;
            let mut in_builtin = false;
            for l in &conj.literals {
                match l {
                    Literal::Atom(a) => occurrences += a.vars().filter(|v| *v == y).count(),
                    Literal::Builtin(b) => {
                        if b.terms().iter().any(|t| matches!(t, Term::Var(v) if v == y)) {
                            in_builtin = true;
                        }
                    }
                }
            }
            occurrences >= 2 || in_builtin
        })
    })
}

/// Split a constraint set into universal, chaseable existential and excluded constraints.
pub fn split_sigma<'a>(sigma: impl IntoIterator<Item = &'a Constraint>) -> SigmaSplit {
    let mut s = SigmaSplit::default();
    for c in sigma {
        if !c.is_existential() {
            s.sigma1.push(c.clone());
        } else if problematic(c) {
            s.excluded.push(c.clone());
        } else {
            s.sigma2_minus.push(c.clone());
        }
    }
    s
}

/// One chase rule: a constraint compiled with its guards.
struct ChaseRule {
    compiled: CConstraint,
    /// Universal slots that must be non-null (relevant universals).
    guards: Vec<usize>,
    /// Builtin-only disjuncts; the rule fires only when all of them are false.
    phi: Vec<usize>,
}

impl ChaseRule {
    fn new(c: &Constraint) -> ChaseRule {
        let compiled = CConstraint::compile(c);
        let rel = c.relevant_vars();
        let guards = c.forall.iter().enumerate().filter(|(_, v)| rel.contains(*v)).map(|(i, _)| i).collect();
        let phi = c.head.iter().enumerate().filter(|(_, d)| d.is_builtin_only()).map(|(i, _)| i).collect();
        ChaseRule { compiled, guards, phi }
    }

    fn fire(&self, d: &Instance, universe: &[Constant], out: &mut BTreeSet<GroundAtom>) {
        let cc = &self.compiled;
        cc.for_each_body_match(d, universe, &mut |b: &mut Binding| {
            if self.guards.iter().any(|i| b[*i].as_ref().is_some_and(Constant::is_null)) {
                return false;
            }
            if self.phi.iter().any(|j| cc.head[*j].builtins.iter().all(|x| builtin_holds(x, b))) {
                return false;
            }
            for conj in &cc.head {
                if conj.atoms.is_empty() {
                    continue;
                }
                for y in &conj.exists {
                    b[*y] = Some(Constant::Null);
                }
                if conj.builtins.iter().all(|x| builtin_holds(x, b)) {
                    for a in &conj.atoms {
                        let args = a
                            .terms
                            .iter()
                            .map(|t| match t {
                                CTerm::Const(c) => c.clone(),
                                CTerm::Slot(i) => b[*i].clone().expect("bound"),
                            })
                            .collect();
                        out.insert(GroundAtom::from_parts(a.pred.clone(), args));
                    }
                }
                for y in &conj.exists {
                    b[*y] = None;
                }
            }
            false
        });
    }
}

/// Result of a chase run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChaseOutcome {
    /// The chase instance.
    pub instance: Instance,
    /// Number of rounds that added at least one atom.
    pub rounds: usize,
}

/// Run the restricted chase and report the number of productive rounds.
///
/// Every round fires all rules against the instance of the previous round:
/// for a ground antecedent match whose relevant universal variables are
/// non-null and whose builtin-only consequent disjuncts are false, the
/// database atoms of every consequent disjunct whose builtins hold are added,
/// with existential positions set to `null`. Builtins are never added.
pub fn r_chase_rounds(d: &Instance, split: &SigmaSplit) -> ChaseOutcome {
    let rules: Vec<ChaseRule> = split.chased().map(ChaseRule::new).collect();
    let consts: BTreeSet<Constant> = split.chased().flat_map(|c| c.constants()).collect();
    let universe: Vec<Constant> = working_universe(d, &consts).into_iter().collect();
    let mut cur = d.clone();
    let mut rounds = 0;
    loop {
        let mut derived = BTreeSet::new();
        for r in &rules {
            r.fire(&cur, &universe, &mut derived);
        }
        let new: Vec<GroundAtom> = derived.into_iter().filter(|a| !cur.contains(a)).collect();
        if new.is_empty() {
            return ChaseOutcome { instance: cur, rounds };
        }
        rounds += 1;
        cur.extend(new);
    }
}

/// The restricted chase instance of `d` under `split`.
pub fn r_chase(d: &Instance, split: &SigmaSplit) -> Instance {
    r_chase_rounds(d, split).instance
}
