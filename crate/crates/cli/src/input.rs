//! Counts CSV and constraint JSON readers.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::Path;

use mediv_core::{MomentConstraint, PriorSpec, SpeciesCounts};
use serde::Deserialize;

use crate::CliError;

/// Reads a `species,count` CSV. Labels must be unique; counts are
/// nonnegative integers.
pub fn read_counts(path: &Path) -> Result<SpeciesCounts, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    parse_counts(&text).map_err(|msg| CliError::Parse(format!("{}: {msg}", path.display())))
        .and_then(|(labels, counts)| {
            SpeciesCounts::new(labels, counts).map_err(|e| CliError::Domain(e.to_string()))
        })
}

/// Parses counts text into labels and counts without domain checks.
pub fn parse_counts(text: &str) -> Result<(Vec<String>, Vec<u64>), String> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| format!("line 1: {e}"))?.clone();
    if header.len() != 2 || &header[0] != "species" || &header[1] != "count" {
        return Err(format!(
            "line 1, column 1: expected header `species,count`, found `{}`",
            header.iter().collect::<Vec<_>>().join(",")
        ));
    }
    let mut labels = Vec::new();
    let mut counts = Vec::new();
    let mut seen = HashSet::new();
    for record in reader.records() {
        let record = record.map_err(|e| match e.position() {
            Some(pos) => format!("line {}: {e}", pos.line()),
            None => e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.iter().all(str::is_empty) {
            continue;
        }
        if record.len() != 2 {
            return Err(format!("line {line}: expected 2 fields, found {}", record.len()));
        }
        let label = &record[0];
        if label.is_empty() {
            return Err(format!("line {line}, column 1: empty species label"));
        }
        let count: u64 = record[1].parse().map_err(|_| {
            format!(
                "line {line}, column 2: invalid count {:?} for species {label:?} \
                 (expected a nonnegative integer)",
                &record[1]
            )
        })?;
        if !seen.insert(label.to_string()) {
            return Err(format!("line {line}, column 1: duplicate species label {label:?}"));
        }
        labels.push(label.to_string());
        counts.push(count);
    }
    Ok((labels, counts))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConstraintFile {
    coefficients: BTreeMap<String, f64>,
    target: f64,
}

/// Reads `{"coefficients": {label: f}, "target": F}`. Species missing from
/// the map get coefficient 0.
pub fn read_constraint(path: &Path, counts: &SpeciesCounts) -> Result<MomentConstraint, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    parse_constraint(&text, counts).map_err(|msg| CliError::Parse(format!("{}: {msg}", path.display())))
}

pub fn parse_constraint(text: &str, counts: &SpeciesCounts) -> Result<MomentConstraint, String> {
    let file: ConstraintFile = serde_json::from_str(text)
        .map_err(|e| format!("line {}, column {}: {e}", e.line(), e.column()))?;
    let mut coefficients = vec![0.0; counts.k()];
    for (label, value) in &file.coefficients {
        let i = counts
            .position(label)
            .ok_or_else(|| format!("constraint references unknown species {label:?}"))?;
        coefficients[i] = *value;
    }
    MomentConstraint::new(coefficients, file.target).map_err(|e| e.to_string())
}

/// `--prior-alpha`: a single positive number or a comma-separated list with
/// one value per species.
pub fn parse_prior(spec: &str, k: usize) -> Result<PriorSpec, CliError> {
    let values = spec
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| CliError::Parse(format!("--prior-alpha: cannot parse {spec:?}")))?;
    let values = match values.len() {
        1 => vec![values[0]; k],
        n if n == k => values,
        n => {
            return Err(CliError::Parse(format!(
                "--prior-alpha: expected 1 or {k} values, got {n}"
            )))
        }
    };
    PriorSpec::new(values).map_err(|e| CliError::Parse(format!("--prior-alpha: {e}")))
}
