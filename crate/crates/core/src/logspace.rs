//! Log-domain arithmetic helpers.

use statrs::function::gamma::ln_gamma;

/// `log Σ exp(x)` with max-shift. Returns `-inf` for an empty or all `-inf` input.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    let sum: f64 = xs.iter().map(|&x| (x - max).exp()).sum();
    max + sum.ln()
}

/// Below this, factorials are summed term by term; the Lanczos `ln_gamma`
/// is off by a few ulps at small integers.
const EXACT_FACTORIAL_LIMIT: u64 = 256;

/// `log n!` for a nonnegative integer.
pub fn ln_factorial(n: u64) -> f64 {
    if n < 2 {
        0.0
    } else if n < EXACT_FACTORIAL_LIMIT {
        (2..=n).map(|i| (i as f64).ln()).sum()
    } else {
        ln_gamma(n as f64 + 1.0)
    }
}

/// `ln Γ(x)`, routed through [`ln_factorial`] for small positive integers.
pub fn ln_gamma_fn(x: f64) -> f64 {
    if x >= 1.0 && x < EXACT_FACTORIAL_LIMIT as f64 && x.fract() == 0.0 {
        ln_factorial(x as u64 - 1)
    } else {
        ln_gamma(x)
    }
}

/// Logarithm of the multivariate beta function `Π Γ(aᵢ) / Γ(Σ aᵢ)`.
pub fn ln_multivariate_beta(alpha: &[f64]) -> f64 {
    let total: f64 = alpha.iter().sum();
    alpha.iter().map(|&a| ln_gamma_fn(a)).sum::<f64>() - ln_gamma_fn(total)
}

/// `x · ln y` with the convention `0 · ln 0 = 0`.
#[inline]
pub fn xlogy(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * y.ln()
    }
}
