//! Simultaneous data-and-moment updating on a finite parameter grid.
//!
//! The joint prior is `P_old(θ) · P_old(x|θ)`. Observing `x'` slices the
//! likelihood table at that outcome; a moment constraint `⟨f(θ)⟩ = F`
//! multiplies the result by `e^{β f(θ)}`, with β chosen so the posterior
//! satisfies the constraint. Without a constraint β is zero and the update
//! is exactly Bayes' rule.
//!
//! All weights are computed in the log domain with a max shift, so `|β f|`
//! up to several hundred is safe.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logspace::log_sum_exp;
use crate::solver::{solve_beta, SolverConfig};

/// Default moment-residual tolerance for the exact engine.
pub const DEFAULT_TOLERANCE: f64 = 1e-10;

/// Gridded parameter space with prior weights and a likelihood table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteModel {
    theta: Vec<f64>,
    prior: Vec<f64>,
    /// `likelihood[x][j] = P_old(x | θ_j)`.
    likelihood: Vec<Vec<f64>>,
}

impl DiscreteModel {
    /// Builds a model, normalizing the prior. Each column of the likelihood
    /// (one per grid point) must be a distribution over outcomes.
    pub fn new(theta: Vec<f64>, prior: Vec<f64>, likelihood: Vec<Vec<f64>>) -> Result<Self> {
        let k = theta.len();
        if k == 0 {
            return Err(Error::InvalidInput("parameter grid is empty".into()));
        }
        if prior.len() != k {
            return Err(Error::DimensionMismatch { expected: k, got: prior.len() });
        }
        if likelihood.is_empty() {
            return Err(Error::InvalidInput("likelihood table has no outcomes".into()));
        }
        if prior.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidInput("prior weights must be finite and nonnegative".into()));
        }
        let total: f64 = prior.iter().sum();
        if !(total > 0.0) {
            return Err(Error::InvalidInput("prior weights sum to zero".into()));
        }
        for row in &likelihood {
            if row.len() != k {
                return Err(Error::DimensionMismatch { expected: k, got: row.len() });
            }
            if row.iter().any(|l| !l.is_finite() || *l < 0.0) {
                return Err(Error::InvalidInput(
                    "likelihood entries must be finite and nonnegative".into(),
                ));
            }
        }
        for j in 0..k {
            let col: f64 = likelihood.iter().map(|row| row[j]).sum();
            if (col - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidInput(format!(
                    "likelihood over outcomes for grid point {j} sums to {col}, not 1"
                )));
            }
        }
        let prior = prior.into_iter().map(|w| w / total).collect();
        Ok(DiscreteModel { theta, prior, likelihood })
    }

    /// Uniform prior over the grid.
    pub fn with_uniform_prior(theta: Vec<f64>, likelihood: Vec<Vec<f64>>) -> Result<Self> {
        let prior = vec![1.0; theta.len()];
        Self::new(theta, prior, likelihood)
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn prior(&self) -> &[f64] {
        &self.prior
    }

    pub fn n_outcomes(&self) -> usize {
        self.likelihood.len()
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    /// Likelihood of `observed` at every grid point: the data constraint.
    pub fn likelihood_slice(&self, observed: usize) -> Result<&[f64]> {
        self.likelihood
            .get(observed)
            .map(Vec::as_slice)
            .ok_or(Error::InvalidOutcome { outcome: observed, n_outcomes: self.likelihood.len() })
    }
}

/// `f(θ)` per grid point and the target `F` for `⟨f⟩`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentSpecDiscrete {
    pub f_values: Vec<f64>,
    pub target: f64,
}

impl MomentSpecDiscrete {
    pub fn new(f_values: Vec<f64>, target: f64) -> Result<Self> {
        if f_values.iter().any(|v| !v.is_finite()) || !target.is_finite() {
            return Err(Error::InvalidInput("moment function and target must be finite".into()));
        }
        Ok(MomentSpecDiscrete { f_values, target })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscretePosterior {
    pub weights: Vec<f64>,
    pub beta: f64,
    pub log_zeta: f64,
    /// `|⟨f⟩ − F|` achieved; zero when no constraint was given.
    pub residual: f64,
}

/// Normalized tilted weights `∝ prior · likelihood · e^{β f}` and the log
/// normalizer. Points with zero prior or zero likelihood get weight exactly 0.
///
/// Works on raw, unnormalized inputs: scaling `prior` or `likelihood` by a
/// positive constant changes only `log_zeta`.
pub fn tilted_weights(
    prior: &[f64],
    likelihood: &[f64],
    f_values: Option<&[f64]>,
    beta: f64,
) -> Result<(Vec<f64>, f64)> {
    let k = prior.len();
    if likelihood.len() != k {
        return Err(Error::DimensionMismatch { expected: k, got: likelihood.len() });
    }
    if let Some(f) = f_values {
        if f.len() != k {
            return Err(Error::DimensionMismatch { expected: k, got: f.len() });
        }
    }
    let log_w: Vec<f64> = (0..k)
        .map(|j| {
            if prior[j] > 0.0 && likelihood[j] > 0.0 {
                let tilt = f_values.map_or(0.0, |f| if beta == 0.0 { 0.0 } else { beta * f[j] });
                prior[j].ln() + likelihood[j].ln() + tilt
            } else {
                f64::NEG_INFINITY
            }
        })
        .collect();
    let log_zeta = log_sum_exp(&log_w);
    if log_zeta == f64::NEG_INFINITY {
        return Err(Error::ZeroEvidence);
    }
    if !log_zeta.is_finite() {
        return Err(Error::NumericalOverflow);
    }
    let weights = log_w.iter().map(|&lw| (lw - log_zeta).exp()).collect();
    Ok((weights, log_zeta))
}

/// Bayes' rule: `prior · L[observed] / evidence`.
pub fn bayes_update(model: &DiscreteModel, observed: usize) -> Result<DiscretePosterior> {
    let like = model.likelihood_slice(observed)?;
    let joint: Vec<f64> = model.prior.iter().zip(like).map(|(p, l)| p * l).collect();
    let evidence: f64 = joint.iter().sum();
    if !(evidence > 0.0) {
        return Err(Error::ZeroEvidence);
    }
    Ok(DiscretePosterior {
        weights: joint.iter().map(|w| w / evidence).collect(),
        beta: 0.0,
        log_zeta: evidence.ln(),
        residual: 0.0,
    })
}

/// `(min, max)` of `f` over grid points with positive Bayes-posterior weight.
pub fn attainable_range(model: &DiscreteModel, observed: usize, f_values: &[f64]) -> Result<(f64, f64)> {
    let like = model.likelihood_slice(observed)?;
    if f_values.len() != model.len() {
        return Err(Error::DimensionMismatch { expected: model.len(), got: f_values.len() });
    }
    let support = support_values(&model.prior, like, f_values);
    if support.is_empty() {
        return Err(Error::ZeroEvidence);
    }
    let lo = support.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = support.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok((lo, hi))
}

fn support_values(prior: &[f64], like: &[f64], f: &[f64]) -> Vec<f64> {
    prior
        .iter()
        .zip(like)
        .zip(f)
        .filter(|((p, l), _)| **p > 0.0 && **l > 0.0)
        .map(|(_, v)| *v)
        .collect()
}

/// Tilted mean and variance of `f` under the posterior at `beta`.
fn tilted_moments(prior: &[f64], like: &[f64], f: &[f64], beta: f64) -> Result<(f64, f64)> {
    let (w, _) = tilted_weights(prior, like, Some(f), beta)?;
    let mean: f64 = w.iter().zip(f).map(|(w, f)| w * f).sum();
    let var: f64 = w.iter().zip(f).map(|(w, f)| w * (f - mean).powi(2)).sum();
    Ok((mean, var))
}

/// Simultaneous update with data `observed` and an optional moment
/// constraint. With `moment = None` this is Bayes' rule computed through the
/// tilted kernel at β = 0.
pub fn me_update(
    model: &DiscreteModel,
    observed: usize,
    moment: Option<&MomentSpecDiscrete>,
    tol: f64,
) -> Result<DiscretePosterior> {
    let like = model.likelihood_slice(observed)?;
    let Some(moment) = moment else {
        let (weights, log_zeta) = tilted_weights(&model.prior, like, None, 0.0)?;
        return Ok(DiscretePosterior { weights, beta: 0.0, log_zeta, residual: 0.0 });
    };
    let f = &moment.f_values;
    let target = moment.target;
    let (lo, hi) = attainable_range(model, observed, f)?;

    if lo == hi {
        if (target - lo).abs() <= tol {
            let (weights, log_zeta) = tilted_weights(&model.prior, like, Some(f), 0.0)?;
            let residual = (lo - target).abs();
            return Ok(DiscretePosterior { weights, beta: 0.0, log_zeta, residual });
        }
        return Err(Error::DegenerateConstraint { value: lo, target });
    }
    if !(target > lo && target < hi) {
        return Err(Error::UnattainableTarget { target, lo, hi });
    }

    let config = SolverConfig::exact().with_tolerance(tol);
    let solution = solve_beta(|b| tilted_moments(&model.prior, like, f, b), target, &config)?;
    let (weights, log_zeta) = tilted_weights(&model.prior, like, Some(f), solution.beta)?;
    let mean: f64 = weights.iter().zip(f).map(|(w, f)| w * f).sum();
    Ok(DiscretePosterior {
        weights,
        beta: solution.beta,
        log_zeta,
        residual: (mean - target).abs(),
    })
}
