//! Diversity measures: frequency-based Shannon and Simpson indices, and the
//! maximum-relative-entropy diversity `S_ME = log ζ(β) − β F`.
//!
//! All logarithms are natural. `S_ME` is stored with the sign convention in
//! which Lagrange multipliers are added to the entropy; see
//! [`SIGN_CONVENTION_NOTE`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logspace::xlogy;
use crate::simplex::{
    draw_bank, draw_bank_with_threads, MomentConstraint, PriorSpec, SpeciesCounts, TiltedBank,
};
use crate::solver::{solve_beta, SolverConfig};

/// Attached to every frequency-based value.
pub const FREQUENCY_CAVEAT: &str = "frequency-based: sample frequencies m_i/n are used as \
stand-ins for species probabilities, which they are not; the value describes the counted \
sample, not the community";

pub const SIGN_CONVENTION_NOTE: &str = "S_ME = log(zeta) - beta*F, with Lagrange multipliers \
added to the entropy; under the thermodynamic convention (multipliers subtracted) beta changes \
sign and the same quantity reads log(zeta) + beta*F";

/// Describes the constant carried by `log ζ` under the flat-prior convention.
pub const ZETA_CONVENTION_NOTE: &str = "zeta includes the multinomial coefficient n!/prod(m_i!) \
and an unnormalized prior kernel prod(p_i^(alpha_i - 1)) over the simplex; with a flat prior \
zeta(0) = n!/(n+k-1)!";

/// ESS fraction below which a report is flagged.
pub const ESS_WARNING_FRACTION: f64 = 0.01;

/// `−Σ (mᵢ/n) ln(mᵢ/n)`, zero-count species contributing nothing.
pub fn shannon(counts: &SpeciesCounts) -> Result<f64> {
    let n = counts.n();
    if n == 0 {
        return Err(Error::EmptySample);
    }
    let n = n as f64;
    let s = -counts
        .counts()
        .iter()
        .map(|&m| {
            let p = m as f64 / n;
            xlogy(p, p)
        })
        .sum::<f64>();
    // -0.0 for a monoculture
    Ok(s.max(0.0))
}

/// Simpson concentration `Σ (mᵢ/n)²`; the diversity form is `1 − simpson`.
pub fn simpson(counts: &SpeciesCounts) -> Result<f64> {
    let n = counts.n();
    if n == 0 {
        return Err(Error::EmptySample);
    }
    let n = n as f64;
    Ok(counts.counts().iter().map(|&m| (m as f64 / n).powi(2)).sum())
}

/// Monte Carlo settings for [`me_diversity`].
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingConfig {
    pub n_samples: usize,
    pub seed: u64,
    /// Worker threads for drawing the bank; `None` uses the global pool.
    /// Results do not depend on this value.
    pub threads: Option<usize>,
    pub solver: SolverConfig,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        SamplingConfig {
            n_samples: 1_000_000,
            seed: 0,
            threads: None,
            solver: SolverConfig::monte_carlo(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub samples: usize,
    pub ess: f64,
    pub ess_fraction: f64,
    /// Set when `ess < 0.01 · samples`.
    pub ess_warning: bool,
    pub stderr_log_zeta: f64,
    /// Standard error of the constrained mean `⟨f⟩` at the solution.
    pub stderr_constraint_mean: f64,
    pub solver_iterations: usize,
    /// `|⟨f⟩_β − F|` on the bank.
    pub residual: f64,
    pub converged: bool,
    /// Solver tolerance after flooring at the Monte Carlo noise level.
    pub effective_tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiversityReport {
    pub s_traditional: f64,
    pub simpson: f64,
    pub simpson_complement: f64,
    pub s_me: f64,
    pub beta: f64,
    pub log_zeta: f64,
    pub log_zeta_at_zero: f64,
    pub target_f: f64,
    pub posterior_means: Vec<f64>,
    pub posterior_stderrs: Vec<f64>,
    pub diagnostics: Diagnostics,
}

/// Draws the sample bank, solves for β, and assembles the report.
///
/// With no constraint, β = 0 and `s_me = log ζ(0)`. A constant constraint
/// function whose value equals the target is vacuous and also gives β = 0.
pub fn me_diversity(
    counts: &SpeciesCounts,
    prior: &PriorSpec,
    constraint: Option<&MomentConstraint>,
    config: &SamplingConfig,
) -> Result<DiversityReport> {
    let k = counts.k();
    let s_traditional = shannon(counts)?;
    let simpson = simpson(counts)?;
    if let Some(c) = constraint {
        if c.coefficients.len() != k {
            return Err(Error::DimensionMismatch { expected: k, got: c.coefficients.len() });
        }
    }

    let bank = match config.threads {
        Some(t) => draw_bank_with_threads(counts, prior, config.n_samples, config.seed, t)?,
        None => draw_bank(counts, prior, config.n_samples, config.seed)?,
    };
    let zeros = vec![0.0; k];
    let f = constraint.map_or(zeros.as_slice(), |c| c.coefficients.as_slice());
    let tilted = TiltedBank::new(&bank, counts, f)?;
    let z0 = tilted.zeta(0.0)?;

    let mut tolerance = config.solver.tolerance;
    let (beta, target, iterations) = match constraint {
        None => (0.0, 0.0, 0),
        Some(c) => {
            let (lo, hi) = c.range();
            if lo == hi {
                if (c.target - lo).abs() > tolerance {
                    return Err(Error::DegenerateConstraint { value: lo, target: c.target });
                }
                (0.0, c.target, 0)
            } else if !(c.target > lo && c.target < hi) {
                return Err(Error::UnattainableTarget { target: c.target, lo, hi });
            } else {
                if tolerance < z0.stderr_dlog_dbeta {
                    log::warn!(
                        "requested tolerance {tolerance:e} is below the Monte Carlo noise floor \
                         {:e}; clamping",
                        z0.stderr_dlog_dbeta
                    );
                    tolerance = z0.stderr_dlog_dbeta;
                }
                let solver = config.solver.with_tolerance(tolerance);
                let sol = solve_beta(|b| tilted.moments(b), c.target, &solver)?;
                (sol.beta, c.target, sol.iterations)
            }
        }
    };

    let z = tilted.zeta(beta)?;
    let means = tilted.posterior_means(beta)?;
    let samples = z.samples_used;
    let ess_fraction = z.ess / samples as f64;
    if ess_fraction < ESS_WARNING_FRACTION {
        log::warn!("effective sample size {:.1} is below 1% of {samples} draws", z.ess);
    }
    let residual = if constraint.is_some() { (z.dlog_dbeta - target).abs() } else { 0.0 };

    Ok(DiversityReport {
        s_traditional,
        simpson,
        simpson_complement: 1.0 - simpson,
        s_me: z.log_zeta - beta * target,
        beta,
        log_zeta: z.log_zeta,
        log_zeta_at_zero: z0.log_zeta,
        target_f: target,
        posterior_means: means.means,
        posterior_stderrs: means.stderrs,
        diagnostics: Diagnostics {
            samples,
            ess: z.ess,
            ess_fraction,
            ess_warning: ess_fraction < ESS_WARNING_FRACTION,
            stderr_log_zeta: z.stderr_log_zeta,
            stderr_constraint_mean: z.stderr_dlog_dbeta,
            solver_iterations: iterations,
            residual,
            converged: residual <= tolerance || constraint.is_none(),
            effective_tolerance: tolerance,
        },
    })
}
