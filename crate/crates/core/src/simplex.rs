//! Partition function of the multinomial model over the probability simplex.
//!
//! For counts `m` with total `n`, a Dirichlet prior kernel `Π pᵢ^{αᵢ−1}` and a
//! linear moment function `f(p) = Σ fᵢ pᵢ`,
//!
//! ```text
//! ζ(β) = ∫ dp  e^{β f(p)} · n!/Π mᵢ! · Π pᵢ^{mᵢ} · Π pᵢ^{αᵢ−1}
//! ```
//!
//! with `dp` the Lebesgue measure on the simplex (`dp₁…dp_{k−1}`). The prior
//! kernel is left unnormalized so that the flat prior (`α = 1`) contributes a
//! constant density of 1 and `ζ(0) = n!/(n+k−1)!`. In general
//!
//! ```text
//! ζ(0) = n!/Π mᵢ! · B(m + α)
//! ```
//!
//! and `ζ(β) = ζ(0) · E[e^{β f(p)}]` where the expectation is over the
//! `Dirichlet(m + α)` posterior. A [`SampleBank`] holds a fixed, seeded set of
//! draws from that posterior; every β is evaluated against the same bank so
//! `log ζ(β)` is a smooth, deterministic function of β.
//!
//! [`grid_oracle`] integrates the same quantity by composite Simpson
//! quadrature for two or three species and serves as an independent check.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logspace::{ln_factorial, ln_multivariate_beta, xlogy};

/// Draws generated per independently seeded chunk.
pub const CHUNK_SIZE: usize = 4096;

/// Observed species counts, the data constraint of the ecology model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpeciesCounts {
    labels: Vec<String>,
    counts: Vec<u64>,
}

impl SpeciesCounts {
    pub fn new(labels: Vec<String>, counts: Vec<u64>) -> Result<Self> {
        if labels.len() != counts.len() {
            return Err(Error::DimensionMismatch { expected: labels.len(), got: counts.len() });
        }
        if counts.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "at least two species are required, got {}",
                counts.len()
            )));
        }
        let mut seen = std::collections::HashSet::new();
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(Error::InvalidInput(format!("duplicate species label {l:?}")));
            }
        }
        Ok(SpeciesCounts { labels, counts })
    }

    /// Counts labelled `s1`, `s2`, ...
    pub fn from_counts(counts: Vec<u64>) -> Result<Self> {
        let labels = (1..=counts.len()).map(|i| format!("s{i}")).collect();
        Self::new(labels, counts)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Number of species `k`.
    pub fn k(&self) -> usize {
        self.counts.len()
    }

    /// Total count `n`.
    pub fn n(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Every count multiplied by `factor`.
    pub fn scaled(&self, factor: u64) -> Self {
        SpeciesCounts {
            labels: self.labels.clone(),
            counts: self.counts.iter().map(|c| c * factor).collect(),
        }
    }
}

/// Linear moment constraint `⟨Σ fᵢ pᵢ⟩ = F`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentConstraint {
    pub coefficients: Vec<f64>,
    pub target: f64,
}

impl MomentConstraint {
    pub fn new(coefficients: Vec<f64>, target: f64) -> Result<Self> {
        if coefficients.iter().any(|c| !c.is_finite()) || !target.is_finite() {
            return Err(Error::InvalidInput("constraint values must be finite".into()));
        }
        Ok(MomentConstraint { coefficients, target })
    }

    /// `(min fᵢ, max fᵢ)`: the closure of the values `f(p)` takes on the simplex.
    pub fn range(&self) -> (f64, f64) {
        let lo = self.coefficients.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = self.coefficients.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }

    pub fn evaluate(&self, p: &[f64]) -> f64 {
        dot(&self.coefficients, p)
    }
}

/// Dirichlet prior concentration; all ones is the flat prior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorSpec {
    concentration: Vec<f64>,
}

impl PriorSpec {
    pub fn new(concentration: Vec<f64>) -> Result<Self> {
        if concentration.iter().any(|a| !(a.is_finite() && *a > 0.0)) {
            return Err(Error::InvalidInput("prior concentrations must be positive".into()));
        }
        Ok(PriorSpec { concentration })
    }

    pub fn flat(k: usize) -> Self {
        PriorSpec { concentration: vec![1.0; k] }
    }

    pub fn symmetric(k: usize, alpha: f64) -> Result<Self> {
        Self::new(vec![alpha; k])
    }

    pub fn concentration(&self) -> &[f64] {
        &self.concentration
    }

    pub fn is_flat(&self) -> bool {
        self.concentration.iter().all(|&a| a == 1.0)
    }

    fn check(&self, k: usize) -> Result<()> {
        if self.concentration.len() != k {
            return Err(Error::DimensionMismatch { expected: k, got: self.concentration.len() });
        }
        Ok(())
    }
}

/// `log ζ` and its first two β-derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZetaEstimate {
    pub log_zeta: f64,
    /// `⟨f⟩` under the tilted posterior.
    pub dlog_dbeta: f64,
    /// Variance of `f` under the tilted posterior.
    pub d2log_dbeta2: f64,
    pub stderr_log_zeta: f64,
    /// Standard error of `dlog_dbeta` (self-normalized estimator).
    pub stderr_dlog_dbeta: f64,
    pub samples_used: usize,
    /// Effective sample size of the tilt weights; `samples_used` at β = 0.
    pub ess: f64,
}

/// Posterior means `⟨pᵢ⟩` with standard errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorMeans {
    pub means: Vec<f64>,
    pub stderrs: Vec<f64>,
    pub ess: f64,
}

/// `log [n!/Π mᵢ! · Π pᵢ^{mᵢ}]`; `-inf` if some `pᵢ = 0` has `mᵢ > 0`.
pub fn log_multinomial(counts: &SpeciesCounts, p: &[f64]) -> Result<f64> {
    let k = counts.k();
    if p.len() != k {
        return Err(Error::DimensionMismatch { expected: k, got: p.len() });
    }
    if p.iter().any(|x| !(x.is_finite() && *x >= 0.0)) || (p.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidInput("point is not on the probability simplex".into()));
    }
    Ok(log_multinomial_coefficient(counts)
        + counts.counts.iter().zip(p).map(|(&m, &pi)| xlogy(m as f64, pi)).sum::<f64>())
}

fn log_multinomial_coefficient(counts: &SpeciesCounts) -> f64 {
    ln_factorial(counts.n()) - counts.counts.iter().map(|&m| ln_factorial(m)).sum::<f64>()
}

/// Closed form `log ζ(0) = log[n!/Π mᵢ!] + log B(m + α)`.
///
/// For the flat prior this is `log[n!/(n+k−1)!]`.
pub fn log_zeta_at_zero(counts: &SpeciesCounts, prior: &PriorSpec) -> Result<f64> {
    prior.check(counts.k())?;
    let post: Vec<f64> = posterior_concentration(counts, prior);
    Ok(log_multinomial_coefficient(counts) + ln_multivariate_beta(&post))
}

fn posterior_concentration(counts: &SpeciesCounts, prior: &PriorSpec) -> Vec<f64> {
    counts.counts.iter().zip(&prior.concentration).map(|(&m, &a)| m as f64 + a).collect()
}

/// Fixed set of draws from the `Dirichlet(m + α)` posterior.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBank {
    seed: u64,
    k: usize,
    prior_alpha: Vec<f64>,
    posterior_alpha: Vec<f64>,
    /// Row-major `n_samples × k`.
    points: Vec<f64>,
    log_zeta0: f64,
}

impl SampleBank {
    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.points.len() / self.k
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn posterior_alpha(&self) -> &[f64] {
        &self.posterior_alpha
    }

    /// Closed-form `log ζ(0)` for the counts and prior the bank was drawn for.
    pub fn log_zeta0(&self) -> f64 {
        self.log_zeta0
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.k..(i + 1) * self.k]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.points.chunks_exact(self.k)
    }

    fn check(&self, counts: &SpeciesCounts) -> Result<()> {
        if counts.k() != self.k {
            return Err(Error::DimensionMismatch { expected: self.k, got: counts.k() });
        }
        let consistent = counts
            .counts
            .iter()
            .zip(&self.prior_alpha)
            .zip(&self.posterior_alpha)
            .all(|((&m, &a), &post)| m as f64 + a == post);
        if !consistent {
            return Err(Error::InvalidInput("sample bank was drawn for different counts".into()));
        }
        Ok(())
    }
}

/// Draws `n_samples` points from `Dirichlet(m + α)` on the current rayon pool.
///
/// Draws are produced in chunks of [`CHUNK_SIZE`]; chunk `c` uses a ChaCha8
/// stream keyed by `(seed, c)`, so the bank does not depend on the number of
/// worker threads.
pub fn draw_bank(
    counts: &SpeciesCounts,
    prior: &PriorSpec,
    n_samples: usize,
    seed: u64,
) -> Result<SampleBank> {
    if n_samples == 0 {
        return Err(Error::InvalidInput("n_samples must be at least 1".into()));
    }
    prior.check(counts.k())?;
    let k = counts.k();
    let alpha = posterior_concentration(counts, prior);
    let gammas = alpha
        .iter()
        .map(|&a| Gamma::new(a, 1.0).map_err(|e| Error::InvalidInput(e.to_string())))
        .collect::<Result<Vec<_>>>()?;

    let mut points = vec![0.0; n_samples * k];
    points
        .par_chunks_mut(CHUNK_SIZE * k)
        .enumerate()
        .for_each(|(chunk, block)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk as u64);
            for row in block.chunks_exact_mut(k) {
                loop {
                    let mut total = 0.0;
                    for (x, g) in row.iter_mut().zip(&gammas) {
                        *x = g.sample(&mut rng);
                        total += *x;
                    }
                    // All coordinates can underflow for very small shapes.
                    if total > 0.0 {
                        row.iter_mut().for_each(|x| *x /= total);
                        break;
                    }
                }
            }
        });

    Ok(SampleBank {
        seed,
        k,
        prior_alpha: prior.concentration.clone(),
        posterior_alpha: alpha,
        points,
        log_zeta0: log_zeta_at_zero(counts, prior)?,
    })
}

/// [`draw_bank`] on a dedicated pool with `threads` workers.
pub fn draw_bank_with_threads(
    counts: &SpeciesCounts,
    prior: &PriorSpec,
    n_samples: usize,
    seed: u64,
    threads: usize,
) -> Result<SampleBank> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::InvalidInput(e.to_string()))?;
    pool.install(|| draw_bank(counts, prior, n_samples, seed))
}

/// A bank paired with one moment function, with `f · p` precomputed for
/// every draw. Evaluating many β values (as the solver does) goes through
/// this type.
#[derive(Debug, Clone)]
pub struct TiltedBank<'a> {
    bank: &'a SampleBank,
    projections: Vec<f64>,
}

impl<'a> TiltedBank<'a> {
    pub fn new(bank: &'a SampleBank, counts: &SpeciesCounts, f: &[f64]) -> Result<Self> {
        bank.check(counts)?;
        if f.len() != bank.k {
            return Err(Error::DimensionMismatch { expected: bank.k, got: f.len() });
        }
        if f.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("constraint coefficients must be finite".into()));
        }
        let projections = bank.points().map(|p| dot(f, p)).collect();
        Ok(TiltedBank { bank, projections })
    }

    pub fn bank(&self) -> &SampleBank {
        self.bank
    }

    /// Unnormalized weights `e^{β s_j − max}` and the shift.
    fn weights(&self, beta: f64) -> Result<(Vec<f64>, f64)> {
        if beta == 0.0 {
            return Ok((vec![1.0; self.projections.len()], 0.0));
        }
        let shift = self
            .projections
            .iter()
            .map(|&s| beta * s)
            .fold(f64::NEG_INFINITY, f64::max);
        if !shift.is_finite() {
            return Err(Error::NumericalOverflow);
        }
        let w = self.projections.iter().map(|&s| (beta * s - shift).exp()).collect();
        Ok((w, shift))
    }

    pub fn zeta(&self, beta: f64) -> Result<ZetaEstimate> {
        if !beta.is_finite() {
            return Err(Error::InvalidInput(format!("beta must be finite, got {beta}")));
        }
        let n = self.projections.len();
        let nf = n as f64;
        let (w, shift) = self.weights(beta)?;
        let sum: f64 = w.iter().sum();
        let sum_sq: f64 = w.iter().map(|x| x * x).sum();
        let mean_w = sum / nf;

        let log_zeta = if beta == 0.0 {
            self.bank.log_zeta0
        } else {
            self.bank.log_zeta0 + shift + mean_w.ln()
        };
        if !log_zeta.is_finite() {
            return Err(Error::NumericalOverflow);
        }

        let mean: f64 = w.iter().zip(&self.projections).map(|(w, s)| w * s).sum::<f64>() / sum;
        let mut var = 0.0;
        let mut se_acc = 0.0;
        for (wj, sj) in w.iter().zip(&self.projections) {
            let d = sj - mean;
            var += wj * d * d;
            se_acc += wj * wj * d * d;
        }
        var /= sum;

        let stderr_log_zeta = if beta == 0.0 || n < 2 {
            0.0
        } else {
            let var_w = w.iter().map(|x| (x - mean_w).powi(2)).sum::<f64>() / (nf - 1.0);
            (var_w / nf).sqrt() / mean_w
        };

        Ok(ZetaEstimate {
            log_zeta,
            dlog_dbeta: mean,
            d2log_dbeta2: var,
            stderr_log_zeta,
            stderr_dlog_dbeta: se_acc.sqrt() / sum,
            samples_used: n,
            ess: sum * sum / sum_sq,
        })
    }

    /// `(⟨f⟩_β, var_β f)`: the solver objective.
    pub fn moments(&self, beta: f64) -> Result<(f64, f64)> {
        let z = self.zeta(beta)?;
        Ok((z.dlog_dbeta, z.d2log_dbeta2))
    }

    pub fn posterior_means(&self, beta: f64) -> Result<PosteriorMeans> {
        let k = self.bank.k;
        let (w, _) = self.weights(beta)?;
        let sum: f64 = w.iter().sum();
        let sum_sq: f64 = w.iter().map(|x| x * x).sum();
        let mut means = vec![0.0; k];
        for (wj, p) in w.iter().zip(self.bank.points()) {
            for (m, pi) in means.iter_mut().zip(p) {
                *m += wj * pi;
            }
        }
        means.iter_mut().for_each(|m| *m /= sum);
        let mut se = vec![0.0; k];
        for (wj, p) in w.iter().zip(self.bank.points()) {
            for i in 0..k {
                let d = p[i] - means[i];
                se[i] += wj * wj * d * d;
            }
        }
        let stderrs = se.iter().map(|s| s.sqrt() / sum).collect();
        Ok(PosteriorMeans { means, stderrs, ess: sum * sum / sum_sq })
    }
}

/// Monte Carlo `log ζ(β)` and derivatives over a fixed bank.
pub fn zeta_at(bank: &SampleBank, counts: &SpeciesCounts, f: &[f64], beta: f64) -> Result<ZetaEstimate> {
    TiltedBank::new(bank, counts, f)?.zeta(beta)
}

/// Self-normalized importance estimates of `⟨pᵢ⟩` under the tilted posterior.
pub fn posterior_means(
    bank: &SampleBank,
    counts: &SpeciesCounts,
    f: &[f64],
    beta: f64,
) -> Result<PosteriorMeans> {
    TiltedBank::new(bank, counts, f)?.posterior_means(beta)
}

/// Quadrature result: the ζ estimate plus posterior means of each `pᵢ`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridQuadrature {
    pub zeta: ZetaEstimate,
    pub means: Vec<f64>,
}

/// Deterministic composite-Simpson quadrature of `ζ(β)` for k = 2 or 3.
///
/// Uses `resolution` intervals per axis (rounded up to even), so the cost is
/// `O(resolution^{k−1})` integrand evaluations. Requires `αᵢ ≥ 1` so the
/// integrand stays bounded on the simplex boundary.
pub fn grid_oracle(
    counts: &SpeciesCounts,
    prior: &PriorSpec,
    f: &[f64],
    beta: f64,
    resolution: usize,
) -> Result<ZetaEstimate> {
    grid_quadrature(counts, prior, f, beta, resolution).map(|q| q.zeta)
}

pub fn grid_quadrature(
    counts: &SpeciesCounts,
    prior: &PriorSpec,
    f: &[f64],
    beta: f64,
    resolution: usize,
) -> Result<GridQuadrature> {
    let k = counts.k();
    if !(k == 2 || k == 3) {
        return Err(Error::UnsupportedDimension(k));
    }
    prior.check(k)?;
    if f.len() != k {
        return Err(Error::DimensionMismatch { expected: k, got: f.len() });
    }
    if resolution < 100 {
        return Err(Error::InvalidInput(format!("resolution must be at least 100, got {resolution}")));
    }
    if prior.concentration.iter().any(|&a| a < 1.0) {
        return Err(Error::InvalidInput("grid quadrature needs prior concentrations >= 1".into()));
    }
    let r = resolution + resolution % 2;
    let n = counts.n() as f64;
    let m: Vec<f64> = counts.counts.iter().map(|&c| c as f64).collect();
    let expo: Vec<f64> = m.iter().zip(&prior.concentration).map(|(m, a)| m + a - 1.0).collect();

    // Upper bound on the log integrand, used as the shift.
    let fmax = f.iter().map(|v| (beta * v).abs()).fold(0.0, f64::max);
    let peak: f64 = if n > 0.0 { m.iter().map(|&mi| xlogy(mi, mi / n)).sum() } else { 0.0 };
    let coefficient = log_multinomial_coefficient(counts);
    let shift = coefficient + peak + fmax;

    let log_h = |p: &[f64]| -> f64 {
        let mut acc = coefficient + beta * dot(f, p) - shift;
        for (e, pi) in expo.iter().zip(p) {
            acc += xlogy(*e, *pi);
        }
        acc
    };

    // Accumulates [h, h·s, h·s², h·p₁, …, h·p_k] at a point.
    let moments_at = |p: &[f64], out: &mut [f64], weight: f64| {
        let h = log_h(p).exp() * weight;
        if h == 0.0 {
            return;
        }
        let s = dot(f, p);
        out[0] += h;
        out[1] += h * s;
        out[2] += h * s * s;
        for i in 0..p.len() {
            out[3 + i] += h * p[i];
        }
    };

    let mut acc = vec![0.0; 3 + k];
    let simpson_weight = |i: usize| -> f64 {
        if i == 0 || i == r {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        }
    };

    if k == 2 {
        let h = 1.0 / r as f64;
        for i in 0..=r {
            let t = i as f64 * h;
            moments_at(&[t, 1.0 - t], &mut acc, simpson_weight(i) * h / 3.0);
        }
    } else {
        let h1 = 1.0 / r as f64;
        for i in 0..=r {
            let p1 = i as f64 * h1;
            let width = 1.0 - p1;
            if width <= 0.0 {
                continue;
            }
            let h2 = width / r as f64;
            let outer = simpson_weight(i) * h1 / 3.0;
            for j in 0..=r {
                let p2 = j as f64 * h2;
                let p3 = (width - p2).max(0.0);
                moments_at(&[p1, p2, p3], &mut acc, outer * simpson_weight(j) * h2 / 3.0);
            }
        }
    }

    let z = acc[0];
    if !(z > 0.0) {
        return Err(Error::NumericalOverflow);
    }
    let mean = acc[1] / z;
    let var = (acc[2] / z - mean * mean).max(0.0);
    Ok(GridQuadrature {
        zeta: ZetaEstimate {
            log_zeta: shift + z.ln(),
            dlog_dbeta: mean,
            d2log_dbeta2: var,
            stderr_log_zeta: 0.0,
            stderr_dlog_dbeta: 0.0,
            samples_used: 0,
            ess: 0.0,
        },
        means: acc[3..].iter().map(|v| v / z).collect(),
    })
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
