//! Stable models of ground disjunctive programs.
//!
//! The search assigns truth values to the atoms that occur in rule heads.
//! Propagation enforces the rules as clauses and prunes atoms left without a
//! possible supporting rule. Every total assignment reached this way is a
//! supported model; it is accepted when no proper subset is a model of its
//! Gelfond–Lifschitz reduct.

use std::collections::{BTreeSet, HashMap, VecDeque};

use serde::Serialize;

use super::ground::{simplify, GAtom, GroundProgram};
use crate::error::{Error, Result};

/// A stable model: the set of true atoms, facts included.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct StableModel {
    /// True atoms in canonical order.
    pub atoms: BTreeSet<GAtom>,
}

impl StableModel {
    /// Membership test.
    pub fn contains(&self, a: &GAtom) -> bool {
        self.atoms.contains(a)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Val {
    Unknown,
    True,
    False,
}

struct IRule {
    head: Vec<usize>,
    pos: Vec<usize>,
    neg: Vec<usize>,
}

enum Task {
    Rule(usize),
    Support(usize),
}

struct Search<'g> {
    atoms: Vec<&'g GAtom>,
    rules: Vec<IRule>,
    occurs: Vec<Vec<usize>>,
    defining: Vec<Vec<usize>>,
    val: Vec<Val>,
    trail: Vec<usize>,
    queue: VecDeque<Task>,
    nodes: u128,
    cap: u128,
    models: Vec<Vec<usize>>,
}

impl<'g> Search<'g> {
    fn new(g: &'g GroundProgram, cap: u128) -> Search<'g> {
        let mut index: HashMap<&GAtom, usize> = HashMap::new();
        let mut atoms = Vec::new();
        let mut id = |a: &'g GAtom, atoms: &mut Vec<&'g GAtom>| -> usize {
            *index.entry(a).or_insert_with(|| {
                atoms.push(a);
                atoms.len() - 1
            })
        };
        let mut rules = Vec::new();
        for r in &g.rules {
            let head = r.head.iter().map(|a| id(a, &mut atoms)).collect();
            let pos = r.pos.iter().map(|a| id(a, &mut atoms)).collect();
            let neg = r.neg.iter().map(|a| id(a, &mut atoms)).collect();
            rules.push(IRule { head, pos, neg });
        }
        let n = atoms.len();
        let mut occurs = vec![Vec::new(); n];
        let mut defining = vec![Vec::new(); n];
        for (i, r) in rules.iter().enumerate() {
            for &a in r.head.iter().chain(&r.pos).chain(&r.neg) {
                if occurs[a].last() != Some(&i) {
                    occurs[a].push(i);
                }
            }
            for &a in &r.head {
                defining[a].push(i);
            }
        }
        Search {
            atoms,
            rules,
            occurs,
            defining,
            val: vec![Val::Unknown; n],
            trail: Vec::new(),
            queue: VecDeque::new(),
            nodes: 0,
            cap,
            models: Vec::new(),
        }
    }

    fn assign(&mut self, a: usize, v: Val) -> bool {
        match self.val[a] {
            Val::Unknown => {
                self.val[a] = v;
                self.trail.push(a);
                for k in 0..self.occurs[a].len() {
                    let r = self.occurs[a][k];
                    self.queue.push_back(Task::Rule(r));
                    for h in 0..self.rules[r].head.len() {
                        self.queue.push_back(Task::Support(self.rules[r].head[h]));
                    }
                }
                true
            }
            x => x == v,
        }
    }

    fn body_false(&self, r: &IRule) -> bool {
        r.pos.iter().any(|&a| self.val[a] == Val::False) || r.neg.iter().any(|&a| self.val[a] == Val::True)
    }

    fn check_rule(&mut self, ri: usize) -> bool {
        let r = &self.rules[ri];
        if self.body_false(r) {
            return true;
        }
        let mut open_body = Vec::new();
        for &a in &r.pos {
            if self.val[a] == Val::Unknown {
                open_body.push((a, Val::False));
            }
        }
        for &a in &r.neg {
            if self.val[a] == Val::Unknown {
                open_body.push((a, Val::True));
            }
        }
        if r.head.iter().any(|&a| self.val[a] == Val::True) {
            return true;
        }
        let open_head: Vec<usize> = r.head.iter().copied().filter(|&a| self.val[a] == Val::Unknown).collect();
        match (open_body.len(), open_head.len()) {
            (0, 0) => false,
            (0, 1) => self.assign(open_head[0], Val::True),
            (1, 0) => self.assign(open_body[0].0, open_body[0].1),
            _ => true,
        }
    }

    /// An atom needs a rule whose body may still be true and whose other head atoms may still be false.
    fn check_support(&mut self, a: usize) -> bool {
        if self.val[a] == Val::False {
            return true;
        }
        let mut candidates = Vec::new();
        for &ri in &self.defining[a] {
            let r = &self.rules[ri];
            if self.body_false(r) || r.head.iter().any(|&h| h != a && self.val[h] == Val::True) {
                continue;
            }
            candidates.push(ri);
            if candidates.len() > 1 {
                return true;
            }
        }
        match (candidates.len(), self.val[a]) {
            (0, Val::True) => false,
            (0, _) => self.assign(a, Val::False),
            (1, Val::True) => {
                let r = &self.rules[candidates[0]];
                let pos = r.pos.clone();
                let neg = r.neg.clone();
                let others: Vec<usize> = r.head.iter().copied().filter(|&h| h != a).collect();
                pos.into_iter().all(|b| self.assign(b, Val::True))
                    && neg.into_iter().all(|b| self.assign(b, Val::False))
                    && others.into_iter().all(|h| self.assign(h, Val::False))
            }
            _ => true,
        }
    }

    fn propagate(&mut self) -> bool {
        while let Some(t) = self.queue.pop_front() {
            let ok = match t {
                Task::Rule(r) => self.check_rule(r),
                Task::Support(a) => self.check_support(a),
            };
            if !ok {
                self.queue.clear();
                return false;
            }
        }
        true
    }

    fn undo(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let a = self.trail.pop().expect("trail entry");
            self.val[a] = Val::Unknown;
        }
    }

    fn run(&mut self) -> Result<()> {
        for r in 0..self.rules.len() {
            self.queue.push_back(Task::Rule(r));
        }
        for a in 0..self.atoms.len() {
            self.queue.push_back(Task::Support(a));
        }
        if self.propagate() {
            self.search(0)?;
        }
        Ok(())
    }

    fn search(&mut self, from: usize) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.cap {
            return Err(Error::Resource { what: "stable model search nodes".into(), cap: self.cap, required: self.nodes });
        }
        let next = (from..self.atoms.len()).find(|&a| self.val[a] == Val::Unknown);
        let Some(a) = next else {
            let m: Vec<usize> = (0..self.atoms.len()).filter(|&a| self.val[a] == Val::True).collect();
            if self.is_model() && self.is_minimal(&m) {
                self.models.push(m);
            }
            return Ok(());
        };
        for v in [Val::False, Val::True] {
            let mark = self.trail.len();
            if self.assign(a, v) && self.propagate() {
                self.search(a + 1)?;
            } else {
                self.queue.clear();
            }
            self.undo(mark);
        }
        Ok(())
    }

    fn is_model(&self) -> bool {
        self.rules.iter().all(|r| {
            self.body_false(r) || r.head.iter().any(|&h| self.val[h] == Val::True)
        })
    }

    /// True when no proper subset of `m` satisfies the reduct of the program with respect to `m`.
    fn is_minimal(&self, m: &[usize]) -> bool {
        if m.is_empty() {
            return true;
        }
        let local: HashMap<usize, usize> = m.iter().enumerate().map(|(i, &a)| (a, i)).collect();
        let mut clauses: Vec<Vec<i64>> = Vec::new();
        for r in &self.rules {
            if r.neg.iter().any(|a| local.contains_key(a)) {
                continue;
            }
            if r.pos.iter().any(|a| !local.contains_key(a)) {
                continue;
            }
            let mut c: Vec<i64> = r.head.iter().filter_map(|a| local.get(a)).map(|&i| i as i64 + 1).collect();
            c.extend(r.pos.iter().map(|a| -(local[a] as i64 + 1)));
            clauses.push(c);
        }
        clauses.push((0..m.len()).map(|i| -(i as i64 + 1)).collect());
        !sat(m.len(), &clauses)
    }
}

/// Satisfiability of a CNF over variables `1..=n` (literal `-v` negates `v`).
fn sat(n: usize, clauses: &[Vec<i64>]) -> bool {
    fn lit_val(assign: &[Option<bool>], l: i64) -> Option<bool> {
        let v = assign[l.unsigned_abs() as usize - 1]?;
        Some(if l > 0 { v } else { !v })
    }
    fn solve(assign: &mut Vec<Option<bool>>, clauses: &[Vec<i64>]) -> bool {
        let mut trail = Vec::new();
        loop {
            let mut unit = None;
            for c in clauses {
                let mut open = None;
                let mut open_count = 0;
                let mut satisfied = false;
                for &l in c {
                    match lit_val(assign, l) {
                        Some(true) => {
                            satisfied = true;
                            break;
                        }
                        Some(false) => {}
                        None => {
                            open_count += 1;
                            open = Some(l);
                        }
                    }
                }
                if satisfied {
                    continue;
                }
                match open_count {
                    0 => {
                        for v in trail {
                            assign[v] = None;
                        }
                        return false;
                    }
                    1 => {
                        unit = open;
                        break;
                    }
                    _ => {}
                }
            }
            match unit {
                Some(l) => {
                    let v = l.unsigned_abs() as usize - 1;
                    assign[v] = Some(l > 0);
                    trail.push(v);
                }
                None => break,
            }
        }
        let Some(v) = (0..assign.len()).find(|&v| assign[v].is_none()) else {
            return true;
        };
        for b in [false, true] {
            assign[v] = Some(b);
            if solve(assign, clauses) {
                return true;
            }
        }
        assign[v] = None;
        for v in trail {
            assign[v] = None;
        }
        false
    }
    let mut assign = vec![None; n];
    solve(&mut assign, clauses)
}

/// All stable models of a ground program, in canonical order. The number of
/// search nodes is bounded by `cap`.
pub fn stable_models(g: &GroundProgram, cap: u128) -> Result<Vec<StableModel>> {
    let g = simplify(g);
    let mut s = Search::new(&g, cap);
    s.run()?;
    let mut out: Vec<StableModel> = s
        .models
        .iter()
        .map(|m| {
            let mut atoms = g.facts.clone();
            atoms.extend(m.iter().map(|&a| s.atoms[a].clone()));
            StableModel { atoms }
        })
        .collect();
    out.sort();
    out.dedup();
    Ok(out)
}
