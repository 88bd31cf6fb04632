//! `mediv`: frequency-based versus maximum-relative-entropy species diversity.
//!
//! Exit codes: 0 ok, 2 parse or usage error, 3 domain error (empty sample,
//! fewer than two species, solver failure), 4 unattainable constraint target,
//! 5 degenerate constraint.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use mediv_core::{
    me_diversity, shannon, simpson, Error, MomentConstraint, PriorSpec, SamplingConfig,
    SolverConfig, SpeciesCounts,
};
use thiserror::Error;

pub mod input;
pub mod report;

use report::{CompareReport, CompareRow, EstimateReport, LogBase, ShannonReport};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Domain(String),
    #[error("{0}")]
    Unattainable(String),
    #[error("{0}")]
    Degenerate(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) | CliError::Io(_) => 2,
            CliError::Domain(_) => 3,
            CliError::Unattainable(_) => 4,
            CliError::Degenerate(_) => 5,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::UnattainableTarget { target, lo, hi } => CliError::Unattainable(format!(
                "constraint target {target} is not attainable; it must lie strictly inside \
                 the interval ({lo}, {hi})"
            )),
            Error::DegenerateConstraint { .. } | Error::StalledAtDegenerate => {
                CliError::Degenerate(e.to_string())
            }
            other => CliError::Domain(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    Text,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "mediv", version, about = "Species diversity from counts: Shannon, Simpson and ME diversity")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Frequency-based Shannon and Simpson indices.
    Shannon(ShannonArgs),
    /// ME diversity with an optional codependence constraint.
    Estimate(EstimateArgs),
    /// Frequency-based and ME diversity side by side for one or more samples.
    Compare(CompareArgs),
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value = "nats")]
    pub log_base: LogBase,
    #[arg(long, value_enum, default_value = "text")]
    pub format: OutputFormat,
}

#[derive(Debug, Args)]
pub struct ShannonArgs {
    /// CSV file with header `species,count`.
    #[arg(long)]
    pub counts: PathBuf,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SamplingArgs {
    /// JSON constraint: {"coefficients": {label: f}, "target": F}.
    #[arg(long)]
    pub constraint: Option<PathBuf>,
    #[arg(long, default_value_t = 1_000_000, value_parser = clap::value_parser!(u64).range(1000..))]
    pub samples: u64,
    #[arg(long, env = "MEDIV_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Dirichlet prior concentration: one value, or one per species.
    #[arg(long, default_value = "1.0")]
    pub prior_alpha: String,
    /// Tolerance on the constraint residual.
    #[arg(long, default_value_t = 1e-4)]
    pub tolerance: f64,
    /// Worker threads for sampling; output does not depend on this.
    #[arg(long)]
    pub threads: Option<usize>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[arg(long)]
    pub counts: PathBuf,
    #[command(flatten)]
    pub sampling: SamplingArgs,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Counts file; repeat to compare several samples.
    #[arg(long, required = true)]
    pub counts: Vec<PathBuf>,
    #[command(flatten)]
    pub sampling: SamplingArgs,
}

impl SamplingArgs {
    fn config(&self) -> Result<SamplingConfig, CliError> {
        if !(self.tolerance > 0.0) {
            return Err(CliError::Parse(format!("--tolerance must be positive, got {}", self.tolerance)));
        }
        if self.threads == Some(0) {
            return Err(CliError::Parse("--threads must be at least 1".into()));
        }
        Ok(SamplingConfig {
            n_samples: self.samples as usize,
            seed: self.seed,
            threads: self.threads,
            solver: SolverConfig::monte_carlo().with_tolerance(self.tolerance),
        })
    }
}

fn render<T: serde::Serialize>(value: &T, text: impl FnOnce() -> String, format: OutputFormat) -> String {
    match format {
        OutputFormat::Text => text(),
        OutputFormat::Json => {
            let mut s = serde_json::to_string_pretty(value).expect("report serializes");
            s.push('\n');
            s
        }
    }
}

fn load_counts(path: &Path) -> Result<SpeciesCounts, CliError> {
    let counts = input::read_counts(path)?;
    if counts.n() == 0 {
        return Err(CliError::Domain(format!("{}: {}", path.display(), Error::EmptySample)));
    }
    Ok(counts)
}

fn load_constraint(path: Option<&Path>, counts: &SpeciesCounts) -> Result<Option<MomentConstraint>, CliError> {
    path.map(|p| input::read_constraint(p, counts)).transpose()
}

pub fn cmd_shannon(args: &ShannonArgs) -> Result<String, CliError> {
    let counts = load_counts(&args.counts)?;
    let report = ShannonReport::new(&counts, shannon(&counts)?, simpson(&counts)?, args.output.log_base);
    Ok(render(&report, || report.to_text(), args.output.format))
}

pub fn cmd_estimate(args: &EstimateArgs) -> Result<String, CliError> {
    let s = &args.sampling;
    let counts = load_counts(&args.counts)?;
    let constraint = load_constraint(s.constraint.as_deref(), &counts)?;
    let prior = input::parse_prior(&s.prior_alpha, counts.k())?;
    let config = s.config()?;
    let result = me_diversity(&counts, &prior, constraint.as_ref(), &config)?;
    let report = EstimateReport::new(
        &counts,
        prior.concentration(),
        constraint.as_ref(),
        &result,
        s.seed,
        s.output.log_base,
    );
    Ok(render(&report, || report.to_text(), s.output.format))
}

pub fn cmd_compare(args: &CompareArgs) -> Result<String, CliError> {
    let s = &args.sampling;
    let config = s.config()?;
    let base = s.output.log_base;
    let d = base.divisor();
    let mut rows = Vec::new();
    for path in &args.counts {
        let counts = load_counts(path)?;
        let constraint = load_constraint(s.constraint.as_deref(), &counts)?;
        let prior: PriorSpec = input::parse_prior(&s.prior_alpha, counts.k())?;
        let plain = me_diversity(&counts, &prior, None, &config)?;
        let constrained = constraint
            .as_ref()
            .map(|c| me_diversity(&counts, &prior, Some(c), &config))
            .transpose()?;
        rows.push(CompareRow {
            sample: path.display().to_string(),
            n: counts.n(),
            k: counts.k(),
            s_traditional: plain.s_traditional / d,
            s_me: plain.s_me / d,
            s_me_constrained: constrained.as_ref().map(|r| r.s_me / d),
            beta_constrained: constrained.as_ref().map(|r| r.beta / d),
        });
    }
    let report = CompareReport::new(rows, s.constraint.is_some(), s.seed, config.n_samples, base);
    Ok(render(&report, || report.to_text(), s.output.format))
}

pub fn run(cli: &Cli) -> Result<String, CliError> {
    match &cli.command {
        Command::Shannon(a) => cmd_shannon(a),
        Command::Estimate(a) => cmd_estimate(a),
        Command::Compare(a) => cmd_compare(a),
    }
}
