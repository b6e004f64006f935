//! One check per acceptance criterion. Each returns whether it passed and a
//! one-line detail; the acceptance target prints them.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use super::gen::{Gen, Pred, DOMAIN};
use super::{golden_path, oracle, run_binary, CASES};
use pdes::asp::{AspOptions, AspSolver};
use pdes::chase::{r_chase, split_sigma};
use pdes::dec::{n_rewrite_constraint, n_rewrite_query, Constraint, ConjunctiveQuery};
use pdes::error::Error;
use pdes::import::{import_program, import_solve, least_model, restricted_import_solve};
use pdes::nullquery::{classical_answers, classical_holds, n_answers, n_holds, n_holds_direct};
use pdes::pdes::{inc_marker, Pca, Pdes};
use pdes::relational::{atoms, Constant, GroundAtom, Instance};
use pdes::repair::null_repairs;

/// Outcome of one criterion.
pub struct Check {
    pub pass: bool,
    pub detail: String,
}

impl Check {
    fn new(pass: bool, detail: impl Into<String>) -> Check {
        Check { pass, detail: detail.into() }
    }
}

/// Collects failed sub-checks of a criterion.
#[derive(Default)]
struct Failures(Vec<String>);

impl Failures {
    fn expect(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.0.push(what.into());
        }
    }

    fn finish(self, ok_detail: impl Into<String>) -> Check {
        if self.0.is_empty() {
            Check::new(true, ok_detail)
        } else {
            Check::new(false, self.0.join("; "))
        }
    }
}

pub fn fixture(name: &str) -> Pdes {
    let path = super::crate_dir().join("fixtures").join(format!("{name}.pdes"));
    Pdes::parse(&std::fs::read_to_string(path).expect("fixture")).expect("fixture parses")
}

fn query(text: &str) -> ConjunctiveQuery {
    ConjunctiveQuery::parse(text).expect("query parses")
}

fn constraint(text: &str) -> Constraint {
    Constraint::parse(text).expect("constraint parses")
}

fn rendered_pca(pdes: &Pdes, p: &str, q: &str) -> Result<BTreeSet<String>, String> {
    let pca = pdes.solver().pca(p, &query(q)).map_err(|e| e.to_string())?;
    Ok(pca.render().into_iter().collect())
}

fn strings(items: &[&str]) -> BTreeSet<String> {
    items.iter().map(|s| s.to_string()).collect()
}

fn tuples(rows: &[&[&str]]) -> BTreeSet<Vec<Constant>> {
    rows.iter().map(|r| r.iter().map(|t| Constant::new(t)).collect()).collect()
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

/// Peer consistent answers of the two-peer import example.
pub fn c1() -> Check {
    let (got, t) = timed(|| rendered_pca(&fixture("ex1_1"), "P1", "exists y,z: R1(x,y,z)"));
    let mut f = Failures::default();
    f.expect(got == Ok(strings(&["c", "f", "d"])), format!("PCA {got:?}"));
    f.expect(t < Duration::from_secs(1), format!("took {t:?}"));
    f.finish(format!("PCA = {{c, d, f}} in {t:.1?}"))
}

/// Six neighborhood solutions under the Δ preorder with equal trust.
pub fn c2() -> Check {
    let start = Instant::now();
    let pdes = fixture("ex3_2");
    let solver = pdes.solver();
    let mut f = Failures::default();
    let dbar = solver.neighborhood_instance("P1").expect("dbar");
    let ns: BTreeSet<Instance> = solver.neighborhood_solutions("P1", &dbar).expect("ns").into_iter().collect();
    f.expect(ns.len() == 6, format!("{} neighborhood solutions", ns.len()));
    let sigma: Vec<Constraint> = pdes.schema.sigma_of("P1").into_iter().map(|(_, c)| c.clone()).collect();
    let expected = oracle::delta_repairs(&dbar, &sigma, &BTreeSet::new(), true, 18);
    f.expect(expected.as_ref() == Some(&ns), "differs from the Δ oracle");
    // Each repair move named in the example occurs in some solution.
    let moves = [
        ("R2(d,5)", false),
        ("S2(5,3)", false),
        ("R1(d,5,3)", true),
        ("S1(3)", false),
        ("S1(7)", false),
        ("S2(5,7)", true),
    ];
    for (atom, present) in moves {
        let a = atoms(atom).iter().next().expect("atom").clone();
        f.expect(ns.iter().any(|d| d.contains(&a) == present), format!("no solution with move on {atom}"));
    }
    let pca = rendered_pca(&pdes, "P1", "exists y,z: R1(x,y,z)");
    f.expect(pca == Ok(strings(&["c", "f"])), format!("PCA {pca:?}"));
    let t = start.elapsed();
    f.expect(t < Duration::from_secs(1), format!("took {t:?}"));
    f.finish(format!("6 neighborhood solutions (equal to Δ oracle), PCA = {{c, f}} in {t:.1?}"))
}

/// Conflicting trust: no neighborhood solution, PCA is the marker.
pub fn c3() -> Check {
    let pdes = fixture("ex3_4");
    let solver = pdes.solver();
    let mut f = Failures::default();
    let ns = solver.neighborhood_solutions("P", &atoms("Q(a,b)")).expect("ns");
    f.expect(ns.is_empty(), format!("{} neighborhood solutions", ns.len()));
    let pca = solver.pca("P", &query("P(x,y)")).expect("pca");
    f.expect(pca == Pca::Inconsistent(inc_marker("P")), format!("PCA {pca:?}"));
    f.finish("NS = ∅, PCA = inc_P")
}

/// Three-peer chain with cores passed upstream.
pub fn c4() -> Check {
    let pdes = fixture("ex3_6");
    let solver = pdes.solver();
    let mut f = Failures::default();
    let p2 = solver.solutions("P2").expect("P2");
    f.expect(p2.solutions.len() == 2, format!("|Sol(P2)| = {}", p2.solutions.len()));
    f.expect(p2.core == atoms("R2(c,4), R2(d,5), S2(5,3)"), format!("Core(P2) = {:?}", p2.core));
    let p1 = solver.solutions("P1").expect("P1");
    f.expect(p1.solutions.len() == 1, format!("|Sol(P1)| = {}", p1.solutions.len()));
    let pca = rendered_pca(&pdes, "P1", "exists y,z: R1(x,y,z), S1(y)");
    f.expect(pca == Ok(strings(&["f"])), format!("PCA {pca:?}"));
    f.finish("|Sol(P2)| = 2, Core(P2) = {R2(c,4), R2(d,5), S2(5,3)}, |Sol(P1)| = 1, PCA = {f}")
}

/// Null-aware answering and rewriting on the worked examples.
pub fn c5() -> Check {
    let mut f = Failures::default();
    let d = atoms("R(1,1,1), R(2,null,null), R(null,3,3), S(null), S(1), S(3)");
    let got = n_answers(&d, &query("exists y,z: R(x,y,z), S(y), y > 2")).tuples;
    f.expect(got == tuples(&[&["null"]]), format!("answers {got:?}"));

    let d = atoms("R(a,b), R(c,d), R(e,null), S(b,f), S(d,g), S(null,j)");
    let got = n_answers(&d, &query("exists y: R(x,y), S(y,z)")).tuples;
    f.expect(got == tuples(&[&["a", "f"], &["c", "g"]]), format!("join answers {got:?}"));

    let psi = constraint("R(x) -> exists y: T(x,y), S(y)");
    for (text, expected) in [
        ("R(a)", false),
        ("R(a), T(a,null), S(null)", false),
        ("R(a), T(a,b), S(b)", true),
        ("R(null)", true),
        ("", true),
    ] {
        f.expect(n_holds(&atoms(text), &psi) == expected, format!("case {{{text}}}"));
    }

    let fd = n_rewrite_constraint(&constraint("R(x,y,z1), R(x,y,z2) -> z1 = z2"));
    let fd_expected = constraint("R(x,y,z1), R(x,y,z2) -> isnull(x) | isnull(y) | isnull(z1) | isnull(z2) | z1 = z2");
    f.expect(fd == fd_expected, format!("key rewriting {fd}"));
    let nn = constraint("R(x,y,z) -> isnotnull(x)");
    f.expect(n_rewrite_constraint(&nn) == nn, "not-null rewriting changed");

    let d = atoms("P(f,7), P(f,5), P(null,8), P(b,null)");
    let got = n_answers(&d, &query("exists y: P(x,y), y > 5")).tuples;
    f.expect(got == tuples(&[&["f"], &["null"]]), format!("comparison answers {got:?}"));
    f.finish("answers {null}; {(a,f),(c,g)}; five existential-join cases; key and not-null rewritings; {f, null}")
}

/// Constraints over two binary predicates in the accepted shape.
pub const CONSTRAINTS: &[&str] = &[
    "R(x,y), R(x,z) -> y = z",
    "R(x,y) -> exists z: S(y,z)",
    "R(x,y) -> exists z: S(x,z), S(z,y)",
    "R(x,y), S(y,z) -> R(x,z)",
    "R(x,y) -> isnotnull(x)",
    "R(x,y) -> x != y | S(x,x)",
    "R(x,x) -> false",
    "R(x,y), S(x,y) -> exists z: R(z,z) | x = \"a\"",
];

/// Conjunctive queries in the SQL-compatible class.
pub const QUERIES: &[&str] = &[
    "exists y: R(x,y), S(y,z)",
    "R(x,y), x = y",
    "exists y: R(x,y), y != \"a\"",
    "R(x,x)",
    "exists y,z: R(x,y), S(z,x)",
    "exists y: R(x,y), isnull(y)",
    "R(x,y), S(y,x)",
];

/// Direct evaluation agrees with the rewritten formulas on every instance
/// over two binary predicates and the domain {a, b, null}.
pub fn c6() -> Check {
    let start = Instant::now();
    let dom = ["a", "b", "null"];
    let mut universe = Vec::new();
    for p in ["R", "S"] {
        for x in dom {
            for y in dom {
                universe.push(GroundAtom::new(p, &[x, y]));
            }
        }
    }
    let cs: Vec<(Constraint, Constraint)> = CONSTRAINTS
        .iter()
        .map(|t| {
            let c = constraint(t);
            let r = n_rewrite_constraint(&c);
            (c, r)
        })
        .collect();
    let qs: Vec<(ConjunctiveQuery, ConjunctiveQuery)> = QUERIES
        .iter()
        .map(|t| {
            let q = query(t);
            let r = n_rewrite_query(&q);
            (q, r)
        })
        .collect();
    let mut discrepancies = 0usize;
    let mut first = None;
    let instances = 1u32 << universe.len();
    for mask in 0..instances {
        let d: Instance = (0..universe.len()).filter(|i| mask >> i & 1 == 1).map(|i| universe[i].clone()).collect();
        for (c, r) in &cs {
            if n_holds_direct(&d, c) != classical_holds(&d, r) {
                discrepancies += 1;
                first.get_or_insert_with(|| format!("{c}"));
            }
        }
        for (q, r) in &qs {
            if n_answers(&d, q).tuples != classical_answers(&d, r).tuples {
                discrepancies += 1;
                first.get_or_insert_with(|| format!("{q}"));
            }
        }
    }
    let t = start.elapsed();
    let mut f = Failures::default();
    f.expect(discrepancies == 0, format!("{discrepancies} discrepancies, first on {first:?}"));
    f.expect(t < Duration::from_secs(60), format!("took {t:?}"));
    f.finish(format!(
        "{instances} instances x ({} constraints + {} queries), 0 discrepancies in {t:.1?}",
        cs.len(),
        qs.len()
    ))
}

const CHASE_PREDS: &[Pred] = &[("R", 2), ("S", 2), ("T", 1)];

/// The worked chase example and chase laws on random instances.
pub fn c7() -> Check {
    let start = Instant::now();
    let mut f = Failures::default();
    let sigma: Vec<Constraint> = [
        "T(x,y) -> R(x,y)",
        "R(x,y), S(y,z) -> Q(x,y,z) | T(x,z)",
        "Q(x,y,z) -> S(x,y), R(y,z)",
        "T(x,y), T(x,z) -> y = z",
        "T(x,y), S(x,y) -> false",
        "forall x,y: R(x,y) -> exists z: Q(x,y,z), x != y",
        "forall x,y,z: Q(x,y,z) -> exists w: R(x,z), S(x,w)",
    ]
    .iter()
    .map(|t| constraint(t))
    .collect();
    let split = split_sigma(&sigma);
    let chase = |d: &str| r_chase(&atoms(d), &split);
    let has = |d: &Instance, a: &str| d.contains(atoms(a).iter().next().expect("atom"));
    f.expect(!has(&chase("T(a,null)"), "R(a,null)"), "R(a,null) generated");
    f.expect(has(&chase("T(a,b)"), "R(a,b)"), "R(a,b) missing");
    f.expect(!chase("R(a,a)").iter().any(|a| a.pred.as_ref() == "Q"), "Q generated from R(a,a)");
    f.expect(has(&chase("R(a,b)"), "Q(a,b,null)"), "Q(a,b,null) missing");
    let both = chase("R(a,b), S(b,c)");
    f.expect(has(&both, "Q(a,b,c)") && has(&both, "T(a,c)"), "disjuncts not both generated");
    f.expect(!has(&chase("R(a,b)"), "R(b,null)"), "R(b,null) generated");
    f.expect(!n_holds(&chase("T(a,b), T(a,c)"), &sigma[3]), "key constraint enforced");
    f.expect(!n_holds(&chase("T(a,b), S(a,b)"), &sigma[4]), "denial enforced");

    let mut law_failures = 0;
    for seed in 0..200u64 {
        let mut g = Gen::new(seed);
        let sigma = g.constraints(CHASE_PREDS, 4);
        let small = g.instance(CHASE_PREDS, &DOMAIN, 5, 0.2);
        let large = small.union(&g.instance(CHASE_PREDS, &DOMAIN, 3, 0.2));
        let split = split_sigma(&sigma);
        let (cs, cl) = (r_chase(&small, &split), r_chase(&large, &split));
        let mut allowed = small.active_domain();
        allowed.extend(sigma.iter().flat_map(|c| c.constants()));
        allowed.insert(Constant::Null);
        let ok = small.is_subset(&cs)
            && cs.is_subset(&cl)
            && r_chase(&cs, &split) == cs
            && cs.active_domain().is_subset(&allowed)
            && cs == oracle::chase(&small, &sigma);
        if !ok {
            law_failures += 1;
        }
    }
    f.expect(law_failures == 0, format!("{law_failures}/200 random instances break a chase law"));
    let t = start.elapsed();
    f.expect(t < Duration::from_secs(30), format!("took {t:?}"));
    f.finish(format!("example behaviors hold; laws + oracle hold on 200 random instances in {t:.1?}"))
}

const REPAIR_PREDS: &[Pred] = &[("R", 2), ("S", 1)];

/// Worked null-repair examples and the exhaustive-subset oracle.
pub fn c8() -> Check {
    let mut f = Failures::default();
    let s54 = vec![constraint("R(x) -> exists y: T(x,y), S(y)")];
    let r54 = null_repairs(&atoms("R(a)"), &s54).expect("repairs").repairs;
    f.expect(r54 == vec![Instance::new()], format!("first example gives {r54:?}"));
    let s55 = vec![constraint("T(x,y), T(x,z) -> y = z"), constraint("T(x,y), S(x,y) -> false")];
    let r55 = null_repairs(&atoms("T(a,b), T(a,c), S(a,c)"), &s55).expect("repairs").repairs;
    let shown: Vec<String> = r55.iter().map(|d| format!("{d:?}")).collect();
    f.expect(
        r55 == vec![atoms("T(a,b), S(a,c)")],
        format!("second example: expected exactly {{T(a,b), S(a,c)}}, got {}", shown.join(" and ")),
    );

    let (mut checked, mut skipped, mut mismatches) = (0, 0, 0);
    let mut seed = 0u64;
    while checked < 100 {
        let mut g = Gen::new(1_000_000 + seed);
        seed += 1;
        let sigma = g.constraints(REPAIR_PREDS, 3);
        let base = g.instance(REPAIR_PREDS, &DOMAIN, 6, 0.2);
        match oracle::null_repairs(&base, &sigma, &BTreeSet::new(), 14) {
            None => skipped += 1,
            Some(expected) => {
                checked += 1;
                let got: BTreeSet<Instance> =
                    null_repairs(&base, &sigma).map(|r| r.repairs.into_iter().collect()).unwrap_or_default();
                if got != expected {
                    mismatches += 1;
                }
            }
        }
    }
    f.expect(mismatches == 0, format!("oracle half: {mismatches}/100 discrepancies"));
    let oracle_note = format!("oracle half: 100 random instances, 0 discrepancies ({skipped} skipped as too large)");
    if !f.0.is_empty() && mismatches == 0 {
        f.0.push(oracle_note.clone());
    }
    f.finish(format!("{{∅}}; {{{{T(a,b), S(a,c)}}}}; {oracle_note}"))
}

/// Null-semantics peer systems.
pub fn c9() -> Check {
    let mut f = Failures::default();
    let pdes = fixture("ex5_6");
    let solver = pdes.solver();
    let dbar = solver.neighborhood_instance("P1").expect("dbar");
    let ns = solver.neighborhood_solutions("P1", &dbar).expect("ns");
    f.expect(ns == vec![Instance::new()], format!("NS(P1) = {ns:?}"));
    let pdes = fixture("ex5_7");
    let solver = pdes.solver();
    let core = solver.core("P2").expect("core");
    f.expect(core == atoms("R2(d,5)"), format!("Core(P2) = {core:?}"));
    let sol = solver.solutions("P4").expect("P4").solutions;
    f.expect(sol == vec![atoms("R4(d,5,1), R4(c,4,null)")], format!("Sol(P4) = {sol:?}"));
    f.finish("NS(P1) = {∅}; Core(P2) = {R2(d,5)}; Sol(P4) = {{R4(c,4,null), R4(d,5,1)}}")
}

/// Two-peer import system whose source holds `n` facts.
pub fn import_chain(n: usize) -> Pdes {
    let facts: Vec<String> = (0..n)
        .map(|i| {
            let (x, y) = (format!("c{}", i % 97), format!("c{}", (i * 7 + 3) % 89));
            if i % 2 == 0 {
                format!("R2({x},{y})")
            } else {
                format!("S2({y},{x})")
            }
        })
        .collect();
    Pdes::parse(&format!(
        "preorder null\npeer P1 {{ R1/2, T1/2 }}\npeer P2 {{ R2/2, S2/2 }}\ntrust P1 less P2\n\
         instance P2 {{ {} }}\n\
         dec P1 P2 : R2(x,y) -> R1(x,y)\n\
         dec P1 P2 : R2(x,y), S2(y,z) -> T1(x,z)\n\
         dec P1 P2 : forall x,y: R2(x,y) -> exists w: T1(y,w)\n",
        facts.join(", ")
    ))
    .expect("parses")
}

/// Least-squares slope of `log t` against `log n`.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let logs: Vec<(f64, f64)> = points.iter().map(|(n, t)| (n.ln(), t.ln())).collect();
    let k = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / k;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / k;
    let num: f64 = logs.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = logs.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    num / den
}

fn time_import(pdes: &Pdes) -> f64 {
    let mut best = Duration::MAX;
    for _ in 0..5 {
        let start = Instant::now();
        let mut runs = 0;
        while start.elapsed() < Duration::from_millis(20) {
            import_solve(pdes, "P1").expect("import system");
            runs += 1;
        }
        best = best.min(start.elapsed() / runs);
    }
    best.as_secs_f64()
}

/// Import case: closed-form solutions, restricted import and runtime growth.
pub fn c10() -> Check {
    let mut f = Failures::default();
    let expected = atoms("R1(a,2), R1(d,5)");
    let pdes = fixture("ex6_1");
    let imported = import_solve(&pdes, "P1");
    let general = pdes.solver().solutions("P1").expect("solutions").solutions;
    f.expect(imported.as_ref().ok() == Some(&expected), format!("first example import {imported:?}"));
    f.expect(general == vec![expected.clone()], format!("first example recursion {general:?}"));

    let pdes = fixture("ex6_5");
    let solver = pdes.solver();
    let dbar = solver.neighborhood_instance("P1").expect("dbar");
    let lm = least_model(&import_program(&pdes, "P1", &dbar).expect("program"));
    let imported = lm.model.restrict(&pdes.schema.preds_of("P1"));
    let general = solver.solutions("P1").expect("solutions").solutions;
    f.expect(imported == expected, format!("second example import {imported:?}"));
    f.expect(general == vec![expected], format!("second example recursion {general:?}"));

    let r = restricted_import_solve(&fixture("ex5_12"), "P1").expect("import system");
    f.expect(r.solutions.is_empty(), format!("clashing imports give {:?}", r.solutions));
    let r = restricted_import_solve(&fixture("ex5_13"), "P").expect("import system");
    f.expect(
        r.solutions == vec![atoms("P(a,b), P(a,d)"), atoms("P(a,c), P(a,d)")],
        format!("restricted import gives {:?}", r.solutions),
    );

    let points: Vec<(f64, f64)> =
        [10, 25, 50, 100, 200].iter().map(|&n| (n as f64, time_import(&import_chain(n)))).collect();
    let slope = loglog_slope(&points);
    f.expect(slope <= 2.2, format!("runtime log-log slope {slope:.2}"));
    f.finish(format!(
        "{{R1(a,2), R1(d,5)}} via import and recursion (both examples); 0 and 2 restricted solutions; log-log slope {slope:.2} over 10-200 facts"
    ))
}

/// How the answer-set solutions of a system relate to the direct semantics.
#[derive(Debug, PartialEq, Eq)]
pub enum AspAgreement {
    /// The program generator refused some peer.
    Refused,
    /// Stable models give exactly the solutions of every peer.
    Exact,
    /// Some peer has extra models; the minimality post-filter removes them.
    ExtraFiltered(String),
    /// Anything else: a missing solution or an extra one the filter keeps.
    Broken(String),
}

/// Compare answer-set and direct solutions of every peer of `pdes`.
pub fn asp_agreement(pdes: &Pdes) -> AspAgreement {
    let raw = AspSolver::new(pdes, AspOptions::default());
    let filtered = AspSolver::new(pdes, AspOptions { post_filter: true, ..AspOptions::default() });
    let direct = pdes.solver();
    let mut extra = None;
    for p in &pdes.schema.peers {
        let got = match raw.run(p, None) {
            Ok(run) => run.solutions,
            Err(Error::Refused(_)) => return AspAgreement::Refused,
            Err(e) => return AspAgreement::Broken(format!("{p}: {e}")),
        };
        let expected = match direct.solutions(p) {
            Ok(r) => r.solutions,
            Err(e) => return AspAgreement::Broken(format!("{p}: {e}")),
        };
        if got == expected {
            continue;
        }
        let detail = format!("{p}: models give {got:?}, semantics gives {expected:?}");
        let complete = expected.iter().all(|d| got.contains(d));
        let repaired = filtered.run(p, None).map(|r| r.solutions == expected).unwrap_or(false);
        if !(complete && repaired) {
            return AspAgreement::Broken(detail);
        }
        extra.get_or_insert(detail);
    }
    extra.map_or(AspAgreement::Exact, AspAgreement::ExtraFiltered)
}

/// Stable models against the direct semantics.
pub fn c11() -> Check {
    let start = Instant::now();
    let mut f = Failures::default();
    for name in ["ex6_1", "ex6_2", "ex6_5"] {
        let r = asp_agreement(&fixture(name));
        f.expect(r == AspAgreement::Exact, format!("{name}: {r:?}"));
    }
    let (mut checked, mut refused, mut seed) = (0, 0, 0u64);
    let (mut extra, mut broken) = (Vec::new(), Vec::new());
    while checked < 200 {
        let (text, pdes) = Gen::new(2_000_000 + seed).system(false);
        seed += 1;
        match asp_agreement(&pdes) {
            AspAgreement::Refused => refused += 1,
            AspAgreement::Exact => checked += 1,
            AspAgreement::ExtraFiltered(d) => {
                checked += 1;
                extra.push(format!("{d} in\n{text}"));
            }
            AspAgreement::Broken(d) => {
                checked += 1;
                broken.push(format!("{d} in\n{text}"));
            }
        }
    }
    f.expect(broken.is_empty(), format!("{} systems lose or keep wrong solutions, first: {:?}", broken.len(), broken.first()));
    f.expect(
        extra.is_empty(),
        format!(
            "{} of 200 systems have stable models that are not solutions (all removed by the post-filter), first: {:?}",
            extra.len(),
            extra.first()
        ),
    );
    let t = start.elapsed();
    f.expect(t < Duration::from_secs(300), format!("took {t:?}"));
    f.finish(format!(
        "3 worked systems + 200 random ref-acyclic systems, 0 discrepancies ({refused} refused by the generator) in {t:.1?}"
    ))
}

/// Existence of solutions under equal trust.
pub fn c12() -> Check {
    let mut empty = Vec::new();
    for seed in 0..200u64 {
        let (text, pdes) = Gen::new(3_000_000 + seed).system(true);
        let solver = pdes.solver();
        for p in &pdes.schema.peers {
            let dbar = solver.neighborhood_instance(p).expect("dbar");
            let ns = solver.neighborhood_solutions(p, &dbar).expect("ns");
            let sol = solver.solutions(p).expect("solutions");
            if ns.is_empty() || sol.solutions.is_empty() {
                empty.push(format!("{p} in\n{text}"));
            }
        }
    }
    let mut f = Failures::default();
    f.expect(empty.is_empty(), format!("{} peers without solutions, first: {:?}", empty.len(), empty.first()));
    f.finish("200 random equal-trust systems: every peer has neighborhood solutions and solutions")
}

/// Referential cycle with and without the post-filter.
pub fn c13() -> Check {
    let mut f = Failures::default();
    let pdes = fixture("cyclic_same");
    let raw = AspSolver::new(&pdes, AspOptions::default()).run("P1", None).expect("run");
    f.expect(raw.models.len() == 2, format!("{} raw models", raw.models.len()));
    let filtered =
        AspSolver::new(&pdes, AspOptions { post_filter: true, ..AspOptions::default() }).run("P1", None).expect("run");
    f.expect(filtered.solutions == vec![atoms("R1(a,b)")], format!("filtered {:?}", filtered.solutions));
    let pdes = fixture("cyclic_less");
    let less = AspSolver::new(&pdes, AspOptions::default()).run("P1", None).expect("run");
    f.expect(less.solutions == vec![atoms("R1(a,b)")], format!("less trust {:?}", less.solutions));
    f.finish("2 raw models, 1 after post-filter ({R1(a,b)}); less trust gives {R1(a,b)} unfiltered")
}

/// Golden transcripts are reproduced byte for byte across runs and thread counts.
pub fn c14() -> Check {
    let mut bad = Vec::new();
    let settings = [None, None, None, Some("1"), Some("2"), Some("4")];
    for case in CASES {
        let golden = std::fs::read_to_string(golden_path(case.name)).unwrap_or_default();
        for threads in settings {
            let (code, text) = run_binary(case.args, threads);
            if code != case.exit || text != golden {
                bad.push(format!("{} (threads {threads:?})", case.name));
            }
        }
    }
    let mut f = Failures::default();
    f.expect(bad.is_empty(), format!("{} mismatches: {}", bad.len(), bad.join(", ")));
    f.finish(format!("{} golden files x 3 runs x thread counts 1/2/4: byte-identical", CASES.len()))
}

/// All criteria in order.
pub fn all() -> Vec<(usize, fn() -> Check)> {
    vec![
        (1, c1 as fn() -> Check),
        (2, c2),
        (3, c3),
        (4, c4),
        (5, c5),
        (6, c6),
        (7, c7),
        (8, c8),
        (9, c9),
        (10, c10),
        (11, c11),
        (12, c12),
        (13, c13),
        (14, c14),
    ]
}
