//! Shared CLI case table and golden-file helpers for the integration tests.

#![allow(dead_code)]

pub mod criteria;
pub mod gen;
pub mod oracle;

use std::path::{Path, PathBuf};
use std::process::Command;

/// One CLI invocation with its golden file name and expected exit code.
pub struct Case {
    pub name: &'static str,
    pub args: &'static [&'static str],
    pub exit: i32,
}

const Q11: &str = "exists y,z: R1(x,y,z)";

/// Every golden CLI invocation. Paths are relative to the crate directory.
pub const CASES: &[Case] = &[
    Case { name: "ex1_1_pca", args: &["pca", "fixtures/ex1_1.pdes", "--peer", "P1", "--query", Q11], exit: 0 },
    Case {
        name: "ex1_1_pca_json",
        args: &["--format", "json", "pca", "fixtures/ex1_1.pdes", "--peer", "P1", "--query", Q11],
        exit: 0,
    },
    Case { name: "ex1_1_solutions", args: &["solutions", "fixtures/ex1_1.pdes"], exit: 0 },
    Case { name: "ex2_2_check", args: &["check", "fixtures/ex2_2.pdes"], exit: 0 },
    Case { name: "ex2_2_check_json", args: &["--format", "json", "check", "fixtures/ex2_2.pdes"], exit: 0 },
    Case { name: "ex3_2_ns", args: &["ns", "fixtures/ex3_2.pdes", "--peer", "P1"], exit: 0 },
    Case { name: "ex3_2_pca", args: &["pca", "fixtures/ex3_2.pdes", "--peer", "P1", "--query", Q11], exit: 0 },
    Case { name: "ex3_4_ns", args: &["ns", "fixtures/ex3_4.pdes", "--peer", "P"], exit: 0 },
    Case { name: "ex3_4_pca", args: &["pca", "fixtures/ex3_4.pdes", "--peer", "P", "--query", "P(x,y)"], exit: 0 },
    Case { name: "ex3_6_solutions", args: &["solutions", "fixtures/ex3_6.pdes"], exit: 0 },
    Case {
        name: "ex3_6_solutions_json",
        args: &["--format", "json", "solutions", "fixtures/ex3_6.pdes"],
        exit: 0,
    },
    Case { name: "ex3_6_core_json", args: &["--format", "json", "core", "fixtures/ex3_6.pdes"], exit: 0 },
    Case {
        name: "ex3_6_pca",
        args: &["pca", "fixtures/ex3_6.pdes", "--peer", "P1", "--query", "exists y,z: R1(x,y,z), S1(y)"],
        exit: 0,
    },
    Case {
        name: "ex4_2_pca",
        args: &["pca", "fixtures/ex4_2.pdes", "--peer", "D", "--query", "exists y,z: R(x,y,z), S(y), y > 2"],
        exit: 0,
    },
    Case {
        name: "ex4_6_pca",
        args: &["pca", "fixtures/ex4_6.pdes", "--peer", "D", "--query", "exists y: R(x,y), S(y,z)"],
        exit: 0,
    },
    Case {
        name: "ex4_11_pca",
        args: &["pca", "fixtures/ex4_11.pdes", "--peer", "D", "--query", "exists y: P(x,y), y > 5"],
        exit: 0,
    },
    Case { name: "ex5_2_chase", args: &["chase", "fixtures/ex5_2.pdes", "--peer", "D"], exit: 0 },
    Case { name: "ex5_4_repairs", args: &["repairs", "fixtures/ex5_4.pdes", "--peer", "D"], exit: 0 },
    Case { name: "ex5_5_repairs", args: &["repairs", "fixtures/ex5_5.pdes", "--peer", "D"], exit: 0 },
    Case { name: "ex5_6_ns", args: &["ns", "fixtures/ex5_6.pdes", "--peer", "P1"], exit: 0 },
    Case { name: "ex5_7_solutions", args: &["solutions", "fixtures/ex5_7.pdes"], exit: 0 },
    Case { name: "ex5_7_core_json", args: &["--format", "json", "core", "fixtures/ex5_7.pdes"], exit: 0 },
    Case { name: "ex5_12_import", args: &["import-solve", "fixtures/ex5_12.pdes", "--peer", "P1"], exit: 0 },
    Case { name: "ex5_13_import", args: &["import-solve", "fixtures/ex5_13.pdes", "--peer", "P"], exit: 0 },
    Case { name: "ex6_1_import", args: &["import-solve", "fixtures/ex6_1.pdes", "--peer", "P1"], exit: 0 },
    Case { name: "ex6_1_emit", args: &["asp", "emit", "fixtures/ex6_1.pdes", "--peer", "P1"], exit: 0 },
    Case {
        name: "ex6_1_emit_v",
        args: &["asp", "emit", "fixtures/ex6_1.pdes", "--peer", "P1", "--disjunction", "v"],
        exit: 0,
    },
    Case { name: "ex6_2_emit", args: &["asp", "emit", "fixtures/ex6_2.pdes", "--peer", "P1"], exit: 0 },
    Case { name: "ex6_2_asp_solve", args: &["asp", "solve", "fixtures/ex6_2.pdes", "--peer", "P1"], exit: 0 },
    Case {
        name: "ex6_2_asp_solve_json",
        args: &["--format", "json", "asp", "solve", "fixtures/ex6_2.pdes", "--peer", "P1"],
        exit: 0,
    },
    Case { name: "ex6_5_solutions", args: &["solutions", "fixtures/ex6_5.pdes"], exit: 0 },
    Case { name: "ex6_5_pca", args: &["pca", "fixtures/ex6_5.pdes", "--peer", "P1", "--query", "R1(x,y)"], exit: 0 },
    Case { name: "ex6_5_asp_solve", args: &["asp", "solve", "fixtures/ex6_5.pdes", "--peer", "P1"], exit: 0 },
    Case { name: "cyclic_same_asp", args: &["asp", "solve", "fixtures/cyclic_same.pdes", "--peer", "P1"], exit: 0 },
    Case {
        name: "cyclic_same_asp_filtered",
        args: &["asp", "solve", "fixtures/cyclic_same.pdes", "--peer", "P1", "--post-filter"],
        exit: 0,
    },
    Case { name: "cyclic_less_asp", args: &["asp", "solve", "fixtures/cyclic_less.pdes", "--peer", "P1"], exit: 0 },
    Case { name: "cyclic_graph_check", args: &["check", "fixtures/cyclic_graph.pdes"], exit: 1 },
    Case { name: "refused_import", args: &["import-solve", "fixtures/ex3_2.pdes", "--peer", "P1"], exit: 1 },
    Case { name: "bad_syntax", args: &["check", "fixtures/bad_syntax.pdes"], exit: 2 },
    Case { name: "unknown_peer", args: &["ns", "fixtures/ex3_2.pdes", "--peer", "P9"], exit: 2 },
    Case { name: "cap_exceeded", args: &["--cap", "2", "ns", "fixtures/ex3_2.pdes", "--peer", "P1"], exit: 3 },
];

/// Crate directory.
pub fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

/// Golden file path of a case.
pub fn golden_path(name: &str) -> PathBuf {
    crate_dir().join("fixtures").join("golden").join(format!("{name}.txt"))
}

/// Run the built binary in the crate directory with the given thread setting.
/// Returns the exit code and the combined transcript stored in golden files.
pub fn run_binary(args: &[&str], threads: Option<&str>) -> (i32, String) {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_pdes"));
    cmd.args(args).current_dir(crate_dir()).env_remove("PDES_CAP").env_remove("PDES_THREADS");
    if let Some(t) = threads {
        cmd.env("PDES_THREADS", t);
    }
    let out = cmd.output().expect("binary runs");
    let code = out.status.code().unwrap_or(-1);
    (code, transcript(code, &out.stdout, &out.stderr))
}

/// Golden transcript: standard output, then standard error and the exit code.
pub fn transcript(code: i32, stdout: &[u8], stderr: &[u8]) -> String {
    let mut s = String::from_utf8_lossy(stdout).into_owned();
    if !stderr.is_empty() {
        s.push_str("--- stderr\n");
        s.push_str(&String::from_utf8_lossy(stderr));
    }
    s.push_str(&format!("--- exit {code}\n"));
    s
}

/// Read a golden file, or write it when `PDES_BLESS` is set.
pub fn golden(name: &str, actual: &str) -> String {
    let path = golden_path(name);
    if std::env::var_os("PDES_BLESS").is_some() {
        std::fs::write(&path, actual).expect("golden written");
    }
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", display(&path)))
}

fn display(p: &Path) -> String {
    p.display().to_string()
}
