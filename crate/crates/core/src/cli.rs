//! Command-line front end over definition files.
//!
//! Exit codes: 0 on success, 1 when the request is refused by the semantics
//! (cyclic accessibility graph, a non-import system passed to the import
//! solver, an unsupported constraint shape), 2 on parse, schema and usage
//! errors, 3 when a resource cap is exceeded. The cap defaults to the
//! library default and can be set with `--cap` or the `PDES_CAP` variable.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::asp::{emit_text, AspOptions, AspSolver, Disjunction};
use crate::chase::{r_chase, split_sigma};
use crate::dec::{parse_query, ref_acyclic, ConjunctiveQuery, Constraint};
use crate::error::{Error, Result};
use crate::import::{classify, import_solve, restricted_import_solve_with, PeerKind};
use crate::pdes::{Config, Pca, Pdes};
use crate::relational::{Instance, Name};
use crate::repair::{repairs, PreorderKind, RepairOptions, DEFAULT_CAP};

/// Output format.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    /// Human readable, canonically ordered text.
    #[default]
    Text,
    /// JSON document.
    Json,
}

/// Preorder selection on the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PreorderArg {
    /// Null-based preorder.
    Null,
    /// Symmetric-difference preorder.
    Delta,
}

impl From<PreorderArg> for PreorderKind {
    fn from(p: PreorderArg) -> Self {
        match p {
            PreorderArg::Null => PreorderKind::NullBased,
            PreorderArg::Delta => PreorderKind::SymmetricDelta,
        }
    }
}

/// Disjunction symbol for emitted programs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DisjunctionArg {
    /// `|`
    Bar,
    /// `v`
    V,
}

/// Command-line arguments.
#[derive(Debug, Parser)]
#[command(name = "pdes", version, about = "Peer data exchange: peer solutions and their consistent answers")]
pub struct Cli {
    /// Output format.
    #[arg(long, value_enum, global = true, default_value = "text")]
    pub format: Format,
    /// Cap on enumerated candidates, ground instantiations and search nodes.
    #[arg(long, global = true, env = "PDES_CAP")]
    pub cap: Option<u128>,
    /// Worker threads used when several peers are evaluated.
    #[arg(long, global = true, env = "PDES_THREADS", default_value_t = 1)]
    pub threads: usize,
    /// Subcommand.
    #[command(subcommand)]
    pub command: Command,
}

/// Subcommands.
#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a definition file and report graph properties and the import classification.
    Check {
        /// Definition file.
        file: PathBuf,
    },
    /// Restricted chase of a peer's neighborhood instance under its constraints.
    Chase {
        /// Definition file.
        file: PathBuf,
        /// Peer.
        #[arg(long)]
        peer: String,
    },
    /// Repairs of a peer's neighborhood instance under its constraints, ignoring trust.
    Repairs {
        /// Definition file.
        file: PathBuf,
        /// Peer.
        #[arg(long)]
        peer: String,
        /// Preorder (defaults to the one declared in the file).
        #[arg(long, value_enum)]
        preorder: Option<PreorderArg>,
    },
    /// Neighborhood solutions of a peer.
    Ns {
        /// Definition file.
        file: PathBuf,
        /// Peer.
        #[arg(long)]
        peer: String,
        /// Preorder (defaults to the one declared in the file).
        #[arg(long, value_enum)]
        preorder: Option<PreorderArg>,
    },
    /// Solutions of one peer or of every peer.
    Solutions {
        /// Definition file.
        file: PathBuf,
        /// Peer; all peers when omitted.
        #[arg(long)]
        peer: Option<String>,
        /// Preorder (defaults to the one declared in the file).
        #[arg(long, value_enum)]
        preorder: Option<PreorderArg>,
    },
    /// Core of one peer or of every peer.
    Core {
        /// Definition file.
        file: PathBuf,
        /// Peer; all peers when omitted.
        #[arg(long)]
        peer: Option<String>,
        /// Preorder (defaults to the one declared in the file).
        #[arg(long, value_enum)]
        preorder: Option<PreorderArg>,
    },
    /// Peer consistent answers to a conjunctive query.
    Pca {
        /// Definition file.
        file: PathBuf,
        /// Peer.
        #[arg(long)]
        peer: String,
        /// Query text, for instance `exists y: R1(x,y)`.
        #[arg(long)]
        query: String,
        /// Preorder (defaults to the one declared in the file).
        #[arg(long, value_enum)]
        preorder: Option<PreorderArg>,
    },
    /// Solutions of a peer in an import system, by least-fixpoint computation.
    ImportSolve {
        /// Definition file.
        file: PathBuf,
        /// Peer.
        #[arg(long)]
        peer: String,
    },
    /// Solution programs.
    Asp {
        /// Action.
        #[command(subcommand)]
        action: AspCommand,
    },
}

/// Actions on solution programs.
#[derive(Debug, Subcommand)]
pub enum AspCommand {
    /// Print the solution program of a peer.
    Emit {
        /// Definition file.
        file: PathBuf,
        /// Peer.
        #[arg(long)]
        peer: String,
        /// Write the program to a file instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Disjunction symbol.
        #[arg(long, value_enum, default_value = "bar")]
        disjunction: DisjunctionArg,
    },
    /// Compute the stable models of a peer's solution program.
    Solve {
        /// Definition file.
        file: PathBuf,
        /// Peer.
        #[arg(long)]
        peer: String,
        /// Drop models that do not correspond to minimal solutions.
        #[arg(long)]
        post_filter: bool,
    },
}

/// Run the front end on `args` (program name first), writing the report to
/// `out` and diagnostics to `err`. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{e}");
                return 2;
            }
            let _ = write!(out, "{e}");
            return 0;
        }
    };
    match execute(&cli) {
        Ok(report) => {
            let _ = out.write_all(report.as_bytes());
            0
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn load(file: &PathBuf) -> Result<Pdes> {
    let text = std::fs::read_to_string(file)
        .map_err(|e| Error::Schema(format!("cannot read {}: {e}", file.display())))?;
    Pdes::parse(&text)
}

fn config(cli: &Cli, preorder: Option<PreorderArg>) -> Config {
    Config { preorder: preorder.map(Into::into), cap: cli.cap.unwrap_or(DEFAULT_CAP), ..Config::default() }
}

fn render_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable report");
    s.push('\n');
    s
}

fn text_lines(lines: impl IntoIterator<Item = String>) -> String {
    let mut s = String::new();
    for l in lines {
        s.push_str(&l);
        s.push('\n');
    }
    s
}

fn peer_sigma(pdes: &Pdes, p: &str) -> Vec<Constraint> {
    pdes.schema.sigma_of(p).into_iter().map(|(_, c)| c.clone()).collect()
}

fn execute(cli: &Cli) -> Result<String> {
    let cap = cli.cap.unwrap_or(DEFAULT_CAP);
    if cap == 0 {
        return Err(Error::Schema("the cap must be at least 1".into()));
    }
    match &cli.command {
        Command::Check { file } => check(cli, &load(file)?),
        Command::Chase { file, peer } => {
            let pdes = load(file)?;
            let dbar = pdes.solver_with(config(cli, None)).neighborhood_instance(peer)?;
            let sigma = peer_sigma(&pdes, peer);
            let chased = r_chase(&dbar, &split_sigma(&sigma));
            Ok(match cli.format {
                Format::Json => render_json(&json!({"peer": peer, "base": dbar, "chase": chased})),
                Format::Text => text_lines([format!("base: {dbar}"), format!("chase: {chased}")]),
            })
        }
        Command::Repairs { file, peer, preorder } => {
            let pdes = load(file)?;
            let solver = pdes.solver_with(config(cli, *preorder));
            let dbar = solver.neighborhood_instance(peer)?;
            let sigma = peer_sigma(&pdes, peer);
            let opts = RepairOptions { cap, ..RepairOptions::default() };
            let set = repairs(&dbar, &sigma, solver.preorder(), &opts)?;
            Ok(instances_report(cli, peer, "repairs", &set.repairs))
        }
        Command::Ns { file, peer, preorder } => {
            let pdes = load(file)?;
            let solver = pdes.solver_with(config(cli, *preorder));
            let dbar = solver.neighborhood_instance(peer)?;
            let ns = solver.neighborhood_solutions(peer, &dbar)?;
            Ok(instances_report(cli, peer, "solutions", &ns))
        }
        Command::Solutions { file, peer, preorder } => {
            let pdes = load(file)?;
            let peers = selected_peers(&pdes, peer.as_deref())?;
            let results = per_peer(cli, &pdes, &peers, *preorder)?;
            Ok(match cli.format {
                Format::Json => {
                    let list: Vec<Value> = results
                        .iter()
                        .map(|(p, r)| {
                            json!({"peer": p, "solutions": r.solutions, "core": r.core, "inconsistent": r.inconsistent})
                        })
                        .collect();
                    render_json(&json!({ "peers": list }))
                }
                Format::Text => text_lines(results.iter().flat_map(|(p, r)| {
                    let mut l = vec![format!("peer {p}: {} solution(s)", r.solutions.len())];
                    l.extend(r.solutions.iter().map(|d| format!("  {d}")));
                    l.push(format!("  core: {}", r.core));
                    l
                })),
            })
        }
        Command::Core { file, peer, preorder } => {
            let pdes = load(file)?;
            let peers = selected_peers(&pdes, peer.as_deref())?;
            let results = per_peer(cli, &pdes, &peers, *preorder)?;
            Ok(match cli.format {
                Format::Json => {
                    let list: Vec<Value> =
                        results.iter().map(|(p, r)| json!({"peer": p, "core": r.core})).collect();
                    render_json(&json!({ "peers": list }))
                }
                Format::Text => text_lines(results.iter().map(|(p, r)| format!("{p}: {}", r.core))),
            })
        }
        Command::Pca { file, peer, query, preorder } => {
            let pdes = load(file)?;
            let q = peer_query(&pdes, peer, query)?;
            let pca = pdes.solver_with(config(cli, *preorder)).pca(peer, &q)?;
            let answers = pca.render();
            Ok(match cli.format {
                Format::Json => render_json(&json!({
                    "peer": peer,
                    "query": q.to_string(),
                    "inconsistent": matches!(pca, Pca::Inconsistent(_)),
                    "pca": answers,
                })),
                Format::Text => text_lines(answers),
            })
        }
        Command::ImportSolve { file, peer } => {
            let pdes = load(file)?;
            let cls = classify(&pdes);
            let reach = pdes.schema.accessible(peer)?;
            let all_unrestricted =
                reach.iter().all(|q| cls.kind(q) == Some(PeerKind::UnrestrictedImport));
            let solutions = if all_unrestricted {
                vec![import_solve(&pdes, peer)?]
            } else {
                restricted_import_solve_with(&pdes, peer, cap)?.solutions
            };
            Ok(instances_report(cli, peer, "solutions", &solutions))
        }
        Command::Asp { action } => asp(cli, action),
    }
}

/// Parse a query and check that it only mentions predicates of `peer`.
fn peer_query(pdes: &Pdes, peer: &str, text: &str) -> Result<ConjunctiveQuery> {
    let q = parse_query(text)?;
    let own = pdes.schema.preds_of(peer);
    pdes.schema.neighbors(peer)?;
    if let Some(a) = q.atoms().find(|a| !own.contains(&a.pred)) {
        return Err(Error::Schema(format!("query predicate {} is not in the schema of {peer}", a.pred)));
    }
    Ok(q)
}

fn instances_report(cli: &Cli, peer: &str, key: &str, items: &[Instance]) -> String {
    match cli.format {
        Format::Json => render_json(&json!({ "peer": peer, key: items })),
        Format::Text => {
            let mut l = vec![format!("{}: {}", key, items.len())];
            l.extend(items.iter().map(|d| format!("  {d}")));
            text_lines(l)
        }
    }
}

fn selected_peers(pdes: &Pdes, peer: Option<&str>) -> Result<Vec<Name>> {
    match peer {
        Some(p) => {
            pdes.schema.neighbors(p)?;
            Ok(vec![crate::relational::name(p)])
        }
        None => Ok(pdes.schema.peers.iter().cloned().collect()),
    }
}

/// Solutions of several peers; peers are split over worker threads and the
/// results are reported in peer order.
fn per_peer(
    cli: &Cli,
    pdes: &Pdes,
    peers: &[Name],
    preorder: Option<PreorderArg>,
) -> Result<Vec<(Name, crate::pdes::SolutionResult)>> {
    let threads = cli.threads.max(1).min(peers.len().max(1));
    let cfg = config(cli, preorder);
    let chunks: Vec<&[Name]> = peers.chunks(peers.len().div_ceil(threads).max(1)).collect();
    let results: Vec<Result<Vec<(Name, crate::pdes::SolutionResult)>>> = std::thread::scope(|s| {
        let handles: Vec<_> = chunks
            .iter()
            .map(|chunk| {
                let cfg = cfg.clone();
                s.spawn(move || {
                    let solver = pdes.solver_with(cfg);
                    chunk.iter().map(|p| Ok((p.clone(), solver.solutions(p)?))).collect::<Result<Vec<_>>>()
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker thread")).collect()
    });
    let mut out = Vec::new();
    for r in results {
        out.extend(r?);
    }
    Ok(out)
}

fn check(cli: &Cli, pdes: &Pdes) -> Result<String> {
    let s = &pdes.schema;
    let cls = classify(pdes);
    let edges: Vec<Value> = s
        .access_graph()
        .edges
        .iter()
        .map(|e| json!({"from": e.from, "to": e.to, "trust": e.trust.to_string()}))
        .collect();
    let mut peers = Vec::new();
    let mut text = vec!["accessibility graph: acyclic".to_string()];
    for e in &s.access_graph().edges {
        text.push(format!("  {} -> {} ({})", e.from, e.to, e.trust));
    }
    for p in &s.peers {
        let sigma = peer_sigma(pdes, p);
        let ra = ref_acyclic(sigma.iter());
        let preds: BTreeSet<String> = s.preds_of(p).iter().map(|n| n.to_string()).collect();
        let c = &cls.peers[p];
        let cycle: Vec<String> = ra.cycle.iter().map(|n| n.to_string()).collect();
        peers.push(json!({
            "peer": p,
            "predicates": preds,
            "neighbors": s.strict_neighbors(p)?,
            "constraints": sigma.len(),
            "ref_acyclic": ra.acyclic,
            "ref_cycle": cycle,
            "classification": c,
        }));
        text.push(format!("peer {p}: predicates {{{}}}, {} constraint(s)", preds.into_iter().collect::<Vec<_>>().join(", "), sigma.len()));
        if ra.acyclic {
            text.push("  ref-acyclic: yes".into());
        } else {
            text.push(format!("  ref-acyclic: no (cycle {})", cycle.join(" -> ")));
        }
        text.push(format!("  import classification: {}", serde_json::to_value(c.kind).expect("kind").as_str().unwrap_or("")));
        text.extend(c.reasons.iter().map(|r| format!("    reason: {r}")));
        text.extend(c.folds.iter().map(|f| format!("    folded: {f}")));
    }
    Ok(match cli.format {
        Format::Json => render_json(&json!({
            "acyclic": true,
            "edges": edges,
            "preorder": s.preorder,
            "peers": peers,
        })),
        Format::Text => text_lines(text),
    })
}

fn asp(cli: &Cli, action: &AspCommand) -> Result<String> {
    let cap = cli.cap.unwrap_or(DEFAULT_CAP);
    match action {
        AspCommand::Emit { file, peer, out, disjunction } => {
            let pdes = load(file)?;
            let solver = AspSolver::new(&pdes, AspOptions { cap, post_filter: false });
            let dbar = solver.neighborhood_instance(peer)?;
            let prog = crate::asp::build_solution_program(&pdes, peer, &dbar)?;
            let d = match disjunction {
                DisjunctionArg::Bar => Disjunction::Bar,
                DisjunctionArg::V => Disjunction::V,
            };
            let text = emit_text(&prog, d);
            match out {
                Some(path) => {
                    std::fs::write(path, &text)
                        .map_err(|e| Error::Schema(format!("cannot write {}: {e}", path.display())))?;
                    Ok(match cli.format {
                        Format::Json => render_json(&json!({"peer": peer, "out": path.display().to_string(), "warnings": prog.warnings})),
                        Format::Text => text_lines(
                            std::iter::once(format!("wrote {}", path.display()))
                                .chain(prog.warnings.iter().map(|w| format!("warning: {w}"))),
                        ),
                    })
                }
                None => Ok(match cli.format {
                    Format::Json => render_json(&json!({"peer": peer, "program": text, "warnings": prog.warnings})),
                    Format::Text => {
                        let mut t: String = prog.warnings.iter().map(|w| format!("% warning: {w}\n")).collect();
                        t.push_str(&text);
                        t
                    }
                }),
            }
        }
        AspCommand::Solve { file, peer, post_filter } => {
            let pdes = load(file)?;
            let solver = AspSolver::new(&pdes, AspOptions { cap, post_filter: *post_filter });
            let run = solver.run(peer, None)?;
            Ok(match cli.format {
                Format::Json => {
                    let models: Vec<Value> = run
                        .models
                        .iter()
                        .zip(&run.instances)
                        .zip(&run.accepted)
                        .map(|((m, d), ok)| {
                            let tss: Vec<String> = m
                                .atoms
                                .iter()
                                .filter(|a| a.ann == Some(crate::asp::Annotation::TStarStar))
                                .map(|a| a.to_string())
                                .collect();
                            json!({"instance": d, "tss": tss, "accepted": ok})
                        })
                        .collect();
                    render_json(&json!({
                        "peer": peer,
                        "models": models,
                        "solutions": run.solutions,
                        "warnings": run.warnings,
                    }))
                }
                Format::Text => {
                    let mut l = vec![format!("stable models: {}", run.models.len())];
                    for (i, (d, ok)) in run.instances.iter().zip(&run.accepted).enumerate() {
                        let tag = if *ok { "" } else { " (removed by post-filter)" };
                        l.push(format!("  model {}: {d}{tag}", i + 1));
                    }
                    l.push(format!("solutions: {}", run.solutions.len()));
                    l.extend(run.solutions.iter().map(|d| format!("  {d}")));
                    l.extend(run.warnings.iter().map(|w| format!("warning: {w}")));
                    text_lines(l)
                }
            })
        }
    }
}
