#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::Command;

pub struct Output {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

/// Runs `mediv` from the fixtures directory with `MEDIV_SEED` cleared.
pub fn mediv(args: &[&str]) -> Output {
    mediv_env(args, &[])
}

pub fn mediv_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_mediv"));
    cmd.args(args).current_dir(fixtures()).env_remove("MEDIV_SEED").env("RUST_LOG", "off");
    for (k, v) in env {
        cmd.env(k, v);
    }
    let out = cmd.output().expect("spawn mediv");
    Output {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8(out.stdout).expect("utf-8 stdout"),
        stderr: String::from_utf8(out.stderr).expect("utf-8 stderr"),
    }
}

/// Golden cases: file name and arguments. Sample counts are kept small so
/// the suite stays fast; the outputs are still fully deterministic.
pub const GOLDEN: &[(&str, &[&str])] = &[
    ("shannon_uniform4.txt", &["shannon", "--counts", "uniform4.csv"]),
    ("shannon_uniform4.json", &["shannon", "--counts", "uniform4.csv", "--format", "json"]),
    (
        "shannon_uniform4_bits.json",
        &["shannon", "--counts", "uniform4.csv", "--log-base", "bits", "--format", "json"],
    ),
    (
        "estimate_forest.txt",
        &["estimate", "--counts", "forest.csv", "--constraint", "codependence.json", "--samples", "20000", "--seed", "7"],
    ),
    (
        "estimate_forest.json",
        &[
            "estimate", "--counts", "forest.csv", "--constraint", "codependence.json", "--samples", "20000",
            "--seed", "7", "--format", "json",
        ],
    ),
    (
        "estimate_forest_unconstrained.json",
        &["estimate", "--counts", "forest.csv", "--samples", "20000", "--seed", "7", "--format", "json"],
    ),
    (
        "compare_forest.txt",
        &[
            "compare", "--counts", "forest.csv", "--counts", "forest_x10.csv", "--constraint",
            "codependence.json", "--samples", "20000", "--seed", "7",
        ],
    ),
    (
        "compare_forest.json",
        &[
            "compare", "--counts", "forest.csv", "--counts", "forest_x10.csv", "--constraint",
            "codependence.json", "--samples", "20000", "--seed", "7", "--format", "json",
        ],
    ),
    ("compare_uniform4.txt", &["compare", "--counts", "uniform4.csv", "--samples", "5000"]),
];

/// Compares every golden case; with `UPDATE_GOLDEN=1` rewrites the files.
/// Returns the names of mismatching cases.
pub fn check_goldens() -> Vec<String> {
    let update = std::env::var_os("UPDATE_GOLDEN").is_some();
    let mut bad = Vec::new();
    for (name, args) in GOLDEN {
        let out = mediv(args);
        let path = golden_dir().join(name);
        if out.code != 0 {
            bad.push(format!("{name}: exit {} ({})", out.code, out.stderr.trim()));
            continue;
        }
        if update {
            std::fs::write(&path, &out.stdout).expect("write golden");
            continue;
        }
        match std::fs::read_to_string(&path) {
            Ok(expected) if expected == out.stdout => {}
            Ok(_) => bad.push(format!("{name}: output differs from golden file")),
            Err(e) => bad.push(format!("{name}: {e}")),
        }
    }
    bad
}

/// Crafted inputs and the exit code each must produce.
pub const EXIT_CASES: &[(i32, &[&str])] = &[
    (2, &["shannon", "--counts", "malformed.csv"]),
    (2, &["shannon", "--counts", "duplicate.csv"]),
    (2, &["estimate", "--counts", "forest.csv", "--constraint", "unknown_species.json", "--samples", "1000"]),
    (2, &["estimate", "--counts", "forest.csv", "--samples", "10"]),
    (3, &["shannon", "--counts", "empty.csv"]),
    (3, &["compare", "--counts", "single.csv", "--samples", "1000"]),
    (4, &["estimate", "--counts", "forest.csv", "--constraint", "unattainable.json", "--samples", "1000"]),
    (5, &["estimate", "--counts", "forest.csv", "--constraint", "degenerate.json", "--samples", "1000"]),
];

pub fn schema() -> serde_json::Value {
    let text = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("report.schema.json"))
        .expect("schema file");
    serde_json::from_str(&text).expect("schema parses")
}

/// Validation errors for `instance` against the shipped schema.
pub fn schema_errors(instance: &serde_json::Value) -> Vec<String> {
    let schema = schema();
    let validator = jsonschema::validator_for(&schema).expect("valid schema");
    validator.iter_errors(instance).map(|e| e.to_string()).collect()
}
