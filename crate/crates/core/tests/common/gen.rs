//! Seeded random instances, constraints and peer systems for the property
//! suites. Systems are produced as definition text and parsed, so the
//! generator exercises the same front end as the command line.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pdes::dec::{ref_acyclic, Constraint};
use pdes::relational::{Constant, GroundAtom, Instance};
use pdes::pdes::Pdes;

/// Small constant domain used throughout.
pub const DOMAIN: [&str; 3] = ["a", "b", "c"];

const VARS: [&str; 3] = ["x", "y", "z"];

/// A predicate with its arity.
pub type Pred = (&'static str, usize);

/// Deterministic generator over a ChaCha stream.
pub struct Gen {
    rng: ChaCha8Rng,
}

impl Gen {
    pub fn new(seed: u64) -> Gen {
        Gen { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn chance(&mut self, p: f64) -> bool {
        self.rng.gen_bool(p)
    }

    pub fn below(&mut self, n: usize) -> usize {
        self.rng.gen_range(0..n)
    }

    /// A constant of `dom`, or `null` with probability `null_p`.
    pub fn constant(&mut self, dom: &[&str], null_p: f64) -> Constant {
        if self.chance(null_p) {
            Constant::Null
        } else {
            Constant::new(dom.choose(&mut self.rng).expect("non-empty domain"))
        }
    }

    /// Up to `max_atoms` distinct atoms over `preds` and `dom ∪ {null}`.
    pub fn instance(&mut self, preds: &[Pred], dom: &[&str], max_atoms: usize, null_p: f64) -> Instance {
        let n = self.rng.gen_range(0..=max_atoms);
        let mut d = Instance::new();
        for _ in 0..n {
            let (p, k) = *preds.choose(&mut self.rng).expect("predicates");
            let args = (0..k).map(|_| self.constant(dom, null_p)).collect();
            d.insert(GroundAtom::from_parts(p.into(), args));
        }
        d
    }

    fn body_term(&mut self) -> String {
        if self.chance(0.1) {
            format!("\"{}\"", DOMAIN.choose(&mut self.rng).expect("domain"))
        } else {
            VARS.choose(&mut self.rng).expect("vars").to_string()
        }
    }

    fn comparison(&mut self, vars: &[String]) -> String {
        let a = vars.choose(&mut self.rng).expect("vars").clone();
        let b = if self.chance(0.7) && vars.len() > 1 {
            vars.iter().filter(|v| **v != a).collect::<Vec<_>>().choose(&mut self.rng).map(|v| v.to_string()).expect("other")
        } else {
            format!("\"{}\"", DOMAIN.choose(&mut self.rng).expect("domain"))
        };
        let op = ["=", "!=", "=", "!="].choose(&mut self.rng).expect("ops");
        format!("{a} {op} {b}")
    }

    fn atom_disjunct(&mut self, vars: &[String], heads: &[Pred]) -> String {
        let (p, k) = *heads.choose(&mut self.rng).expect("head predicates");
        let mut existential = false;
        let args: Vec<String> = (0..k)
            .map(|_| {
                if vars.is_empty() || self.chance(0.3) {
                    existential = true;
                    "w".to_string()
                } else {
                    vars.choose(&mut self.rng).expect("vars").clone()
                }
            })
            .collect();
        let mut text = format!("{p}({})", args.join(","));
        if existential && self.chance(0.15) {
            let (q, m) = *heads.choose(&mut self.rng).expect("head predicates");
            let more: Vec<&str> = (0..m).map(|_| "w").collect();
            text.push_str(&format!(", {q}({})", more.join(",")));
        }
        if existential {
            format!("exists w: {text}")
        } else {
            text
        }
    }

    /// Constraint text with antecedent over `bodies` and consequent atoms over `heads`.
    pub fn constraint_text(&mut self, bodies: &[Pred], heads: &[Pred]) -> String {
        let n = if self.chance(0.6) { 1 } else { 2 };
        let mut vars: Vec<String> = Vec::new();
        let mut atoms = Vec::new();
        for _ in 0..n {
            let (p, k) = *bodies.choose(&mut self.rng).expect("body predicates");
            let args: Vec<String> = (0..k).map(|_| self.body_term()).collect();
            for a in &args {
                if !a.starts_with('"') && !vars.contains(a) {
                    vars.push(a.clone());
                }
            }
            atoms.push(format!("{p}({})", args.join(",")));
        }
        let kinds = if vars.is_empty() { vec![1, 3] } else { vec![0, 1, 1, 2, 3] };
        let head = match *kinds.choose(&mut self.rng).expect("kinds") {
            0 => self.comparison(&vars),
            1 => self.atom_disjunct(&vars, heads),
            2 => {
                let first = self.atom_disjunct(&vars, heads);
                let second = if self.chance(0.5) { self.comparison(&vars) } else { self.atom_disjunct(&vars, heads) };
                format!("{first} | {second}")
            }
            _ => "false".to_string(),
        };
        format!("{} -> {head}", atoms.join(", "))
    }

    /// Up to `max` parseable constraints over `preds`.
    pub fn constraints(&mut self, preds: &[Pred], max: usize) -> Vec<Constraint> {
        let n = self.rng.gen_range(1..=max);
        (0..n).filter_map(|_| Constraint::parse(&self.constraint_text(preds, preds)).ok()).collect()
    }

    /// A peer system with up to three peers, acyclic edges from lower to
    /// higher index, one or two predicates of arity at most two per peer and
    /// a ref-acyclic constraint set for every peer. Each edge gets `same`
    /// trust when `all_same`, otherwise a random trust value.
    pub fn system(&mut self, all_same: bool) -> (String, Pdes) {
        loop {
            let text = self.system_text(all_same);
            if let Ok(pdes) = Pdes::parse(&text) {
                let acyclic = pdes.schema.peers.iter().all(|p| {
                    let sigma: Vec<&Constraint> = pdes.schema.sigma_of(p).into_iter().map(|(_, c)| c).collect();
                    ref_acyclic(sigma).acyclic
                });
                if acyclic {
                    return (text, pdes);
                }
            }
        }
    }

    fn system_text(&mut self, all_same: bool) -> String {
        const NAMES: [[Pred; 2]; 3] = [[("A1", 2), ("B1", 1)], [("A2", 2), ("B2", 1)], [("A3", 2), ("B3", 1)]];
        let peers = self.rng.gen_range(1..=3);
        let mut schemas: Vec<Vec<Pred>> = Vec::new();
        let mut out = String::from("preorder null\n");
        for (i, names) in NAMES.iter().enumerate().take(peers) {
            let mut preds = vec![(names[0].0, self.rng.gen_range(1..=2))];
            if self.chance(0.5) {
                preds.push(names[1]);
            }
            let decl: Vec<String> = preds.iter().map(|(p, k)| format!("{p}/{k}")).collect();
            out.push_str(&format!("peer P{} {{ {} }}\n", i + 1, decl.join(", ")));
            schemas.push(preds);
        }
        for (i, preds) in schemas.iter().enumerate() {
            let d = self.instance(preds, &DOMAIN, 3, 0.15);
            let atoms: Vec<String> = d.iter().map(|a| a.to_string()).collect();
            out.push_str(&format!("instance P{} {{ {} }}\n", i + 1, atoms.join(", ")));
        }
        for i in 0..peers {
            if self.chance(0.4) {
                let t = self.constraint_text(&schemas[i], &schemas[i]);
                out.push_str(&format!("dec P{0} P{0} : {t}\n", i + 1));
            }
            for j in i + 1..peers {
                if !self.chance(0.7) {
                    continue;
                }
                let trust = if all_same || self.chance(0.5) { "same" } else { "less" };
                out.push_str(&format!("trust P{} {trust} P{}\n", i + 1, j + 1));
                let both: Vec<Pred> = schemas[i].iter().chain(&schemas[j]).copied().collect();
                let from_neighbor = self.chance(0.6);
                let t = if from_neighbor {
                    self.constraint_text(&schemas[j], &schemas[i])
                } else {
                    self.constraint_text(&both, &both)
                };
                out.push_str(&format!("dec P{} P{} : {t}\n", i + 1, j + 1));
            }
        }
        out
    }
}
