//! Report types shared by the JSON and text outputs.
//!
//! Field order here is the JSON field order. The JSON shape is described by
//! `report.schema.json` at the crate root.

use std::fmt::Write as _;

use mediv_core::diversity::{FREQUENCY_CAVEAT, SIGN_CONVENTION_NOTE, ZETA_CONVENTION_NOTE};
use mediv_core::{Diagnostics, DiversityReport, MomentConstraint, SpeciesCounts};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum LogBase {
    Nats,
    Bits,
}

impl LogBase {
    /// Divisor converting a natural-log quantity to this base.
    pub fn divisor(self) -> f64 {
        match self {
            LogBase::Nats => 1.0,
            LogBase::Bits => std::f64::consts::LN_2,
        }
    }

    fn unit(self) -> &'static str {
        match self {
            LogBase::Nats => "nats",
            LogBase::Bits => "bits",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeciesFrequency {
    pub species: String,
    pub count: u64,
    pub frequency: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShannonReport {
    pub command: String,
    pub log_base: LogBase,
    pub n: u64,
    pub k: usize,
    pub species: Vec<SpeciesFrequency>,
    pub s_traditional: f64,
    pub simpson: f64,
    pub simpson_complement: f64,
    pub caveat: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeciesCoefficient {
    pub species: String,
    pub coefficient: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintEcho {
    pub coefficients: Vec<SpeciesCoefficient>,
    pub target: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeciesMean {
    pub species: String,
    pub count: u64,
    pub frequency: f64,
    pub mean: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Notes {
    pub s_traditional: String,
    pub s_me: String,
    pub zeta: String,
}

impl Notes {
    fn standard() -> Self {
        Notes {
            s_traditional: FREQUENCY_CAVEAT.to_string(),
            s_me: SIGN_CONVENTION_NOTE.to_string(),
            zeta: ZETA_CONVENTION_NOTE.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimateReport {
    pub command: String,
    pub log_base: LogBase,
    pub seed: u64,
    pub samples: usize,
    pub n: u64,
    pub k: usize,
    pub prior_alpha: Vec<f64>,
    pub constraint: Option<ConstraintEcho>,
    pub s_traditional: f64,
    pub simpson: f64,
    pub simpson_complement: f64,
    pub beta: f64,
    pub log_zeta: f64,
    pub log_zeta_at_zero: f64,
    pub target_f: f64,
    pub s_me: f64,
    pub posterior_means: Vec<SpeciesMean>,
    pub diagnostics: Diagnostics,
    pub notes: Notes,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareRow {
    pub sample: String,
    pub n: u64,
    pub k: usize,
    pub s_traditional: f64,
    pub s_me: f64,
    pub s_me_constrained: Option<f64>,
    pub beta_constrained: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareReport {
    pub command: String,
    pub log_base: LogBase,
    pub seed: u64,
    pub samples: usize,
    pub constrained: bool,
    pub rows: Vec<CompareRow>,
    /// Pairs of samples with equal frequency-based diversity but different
    /// ME diversity.
    pub flags: Vec<String>,
    pub notes: Notes,
}

fn frequencies(counts: &SpeciesCounts) -> Vec<f64> {
    let n = counts.n() as f64;
    counts.counts().iter().map(|&m| m as f64 / n).collect()
}

impl ShannonReport {
    pub fn new(counts: &SpeciesCounts, s_traditional: f64, simpson: f64, base: LogBase) -> Self {
        let species = counts
            .labels()
            .iter()
            .zip(counts.counts())
            .zip(frequencies(counts))
            .map(|((l, &c), f)| SpeciesFrequency { species: l.clone(), count: c, frequency: f })
            .collect();
        ShannonReport {
            command: "shannon".into(),
            log_base: base,
            n: counts.n(),
            k: counts.k(),
            species,
            s_traditional: s_traditional / base.divisor(),
            simpson,
            simpson_complement: 1.0 - simpson,
            caveat: FREQUENCY_CAVEAT.to_string(),
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let w = label_width(self.species.iter().map(|s| s.species.as_str()));
        let _ = writeln!(out, "{:<w$}  {:>8}  {:>10}", "species", "count", "frequency");
        for s in &self.species {
            let _ = writeln!(out, "{:<w$}  {:>8}  {:>10.6}", s.species, s.count, s.frequency);
        }
        let _ = writeln!(out);
        let _ = writeln!(out, "n = {}, k = {}", self.n, self.k);
        let _ = writeln!(out, "S_traditional      {:.6} {}", self.s_traditional, self.log_base.unit());
        let _ = writeln!(out, "Simpson sum p^2    {:.6}", self.simpson);
        let _ = writeln!(out, "Simpson 1 - sum    {:.6}", self.simpson_complement);
        let _ = writeln!(out);
        let _ = writeln!(out, "note: {}", self.caveat);
        out
    }
}

impl EstimateReport {
    pub fn new(
        counts: &SpeciesCounts,
        prior_alpha: &[f64],
        constraint: Option<&MomentConstraint>,
        report: &DiversityReport,
        seed: u64,
        base: LogBase,
    ) -> Self {
        let d = base.divisor();
        let posterior_means = counts
            .labels()
            .iter()
            .zip(counts.counts())
            .zip(frequencies(counts))
            .zip(report.posterior_means.iter().zip(&report.posterior_stderrs))
            .map(|(((l, &c), f), (&m, &se))| SpeciesMean {
                species: l.clone(),
                count: c,
                frequency: f,
                mean: m,
                stderr: se,
            })
            .collect();
        let constraint = constraint.map(|c| ConstraintEcho {
            coefficients: counts
                .labels()
                .iter()
                .zip(&c.coefficients)
                .map(|(l, &v)| SpeciesCoefficient { species: l.clone(), coefficient: v })
                .collect(),
            target: c.target,
        });
        let mut diagnostics = report.diagnostics.clone();
        diagnostics.stderr_log_zeta /= d;
        EstimateReport {
            command: "estimate".into(),
            log_base: base,
            seed,
            samples: report.diagnostics.samples,
            n: counts.n(),
            k: counts.k(),
            prior_alpha: prior_alpha.to_vec(),
            constraint,
            s_traditional: report.s_traditional / d,
            simpson: report.simpson,
            simpson_complement: report.simpson_complement,
            beta: report.beta / d,
            log_zeta: report.log_zeta / d,
            log_zeta_at_zero: report.log_zeta_at_zero / d,
            target_f: report.target_f,
            s_me: report.s_me / d,
            posterior_means,
            diagnostics,
            notes: Notes::standard(),
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let unit = self.log_base.unit();
        let _ = writeln!(out, "seed {}, {} samples, n = {}, k = {}", self.seed, self.samples, self.n, self.k);
        match &self.constraint {
            Some(c) => {
                let terms: Vec<String> = c
                    .coefficients
                    .iter()
                    .filter(|t| t.coefficient != 0.0)
                    .map(|t| format!("{}*p[{}]", t.coefficient, t.species))
                    .collect();
                let _ = writeln!(out, "constraint <{}> = {}", terms.join(" + "), c.target);
            }
            None => {
                let _ = writeln!(out, "constraint none");
            }
        }
        let _ = writeln!(out);
        let w = label_width(self.posterior_means.iter().map(|s| s.species.as_str()));
        let _ = writeln!(
            out,
            "{:<w$}  {:>8}  {:>10}  {:>12}  {:>10}",
            "species", "count", "frequency", "post. mean", "stderr"
        );
        for s in &self.posterior_means {
            let _ = writeln!(
                out,
                "{:<w$}  {:>8}  {:>10.6}  {:>12.6}  {:>10.2e}",
                s.species, s.count, s.frequency, s.mean, s.stderr
            );
        }
        let _ = writeln!(out);
        let _ = writeln!(out, "S_traditional      {:.6} {unit}", self.s_traditional);
        let _ = writeln!(out, "Simpson sum p^2    {:.6}", self.simpson);
        let _ = writeln!(out, "Simpson 1 - sum    {:.6}", self.simpson_complement);
        let _ = writeln!(out, "beta               {:.6}", self.beta);
        let _ = writeln!(out, "log zeta           {:.6} (+/- {:.1e})", self.log_zeta, self.diagnostics.stderr_log_zeta);
        let _ = writeln!(out, "log zeta(0)        {:.6}", self.log_zeta_at_zero);
        let _ = writeln!(out, "S_ME               {:.6} {unit}", self.s_me);
        let _ = writeln!(out);
        let d = &self.diagnostics;
        let _ = writeln!(
            out,
            "ESS {:.1} ({:.2}% of draws){}",
            d.ess,
            100.0 * d.ess_fraction,
            if d.ess_warning { "  WARNING: low effective sample size" } else { "" }
        );
        let _ = writeln!(
            out,
            "solver: {} iterations, residual {:.2e}, tolerance {:.2e}, converged {}",
            d.solver_iterations, d.residual, d.effective_tolerance, d.converged
        );
        let _ = writeln!(out);
        let _ = writeln!(out, "note: S_traditional is {}", self.notes.s_traditional);
        let _ = writeln!(out, "note: {}", self.notes.s_me);
        let _ = writeln!(out, "note: {}", self.notes.zeta);
        out
    }
}

impl CompareReport {
    pub fn new(rows: Vec<CompareRow>, constrained: bool, seed: u64, samples: usize, base: LogBase) -> Self {
        let mut flags = Vec::new();
        for (i, a) in rows.iter().enumerate() {
            for b in &rows[i + 1..] {
                if (a.s_traditional - b.s_traditional).abs() <= 1e-12 && a.s_me != b.s_me {
                    flags.push(format!(
                        "{} and {}: same S_traditional, S_ME differs by {:.6}",
                        a.sample,
                        b.sample,
                        b.s_me - a.s_me
                    ));
                }
            }
        }
        CompareReport {
            command: "compare".into(),
            log_base: base,
            seed,
            samples,
            constrained,
            rows,
            flags,
            notes: Notes::standard(),
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let unit = self.log_base.unit();
        let _ = writeln!(out, "seed {}, {} samples, values in {unit}", self.seed, self.samples);
        let _ = writeln!(out);
        let w = label_width(self.rows.iter().map(|r| r.sample.as_str()));
        let _ = write!(out, "{:<w$}  {:>8}  {:>4}  {:>14}  {:>12}", "sample", "n", "k", "S_traditional", "S_ME");
        if self.constrained {
            let _ = write!(out, "  {:>14}  {:>10}", "S_ME (constr.)", "beta");
        }
        let _ = writeln!(out);
        for r in &self.rows {
            let _ = write!(
                out,
                "{:<w$}  {:>8}  {:>4}  {:>14.6}  {:>12.6}",
                r.sample, r.n, r.k, r.s_traditional, r.s_me
            );
            if let (Some(s), Some(b)) = (r.s_me_constrained, r.beta_constrained) {
                let _ = write!(out, "  {s:>14.6}  {b:>10.6}");
            }
            let _ = writeln!(out);
        }
        if !self.flags.is_empty() {
            let _ = writeln!(out);
            for f in &self.flags {
                let _ = writeln!(out, "flag: {f}");
            }
        }
        let _ = writeln!(out);
        let _ = writeln!(out, "note: S_traditional is {}", self.notes.s_traditional);
        let _ = writeln!(out, "note: {}", self.notes.s_me);
        let _ = writeln!(out, "note: {}", self.notes.zeta);
        out
    }
}

fn label_width<'a>(labels: impl Iterator<Item = &'a str>) -> usize {
    labels.map(|l| l.chars().count()).max().unwrap_or(0).max(7)
}
