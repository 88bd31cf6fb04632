//! One-dimensional solver for the Lagrange multiplier of a moment constraint.
//!
//! The objective is the tilted mean `β ↦ ⟨f⟩_β`, which is nondecreasing
//! because its derivative is the tilted variance of `f`. The solver expands a
//! bracket geometrically from the starting point until the target is
//! straddled, then alternates Newton steps (using the variance as the
//! derivative) with bisection whenever Newton would leave the bracket or
//! fails to halve the residual.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest multiplier magnitude the bracket expansion will try.
pub const BETA_GUARD: f64 = 1e6;

/// Variance below which the objective is considered flat.
pub const DEGENERATE_VARIANCE: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Tolerance on the moment residual `|⟨f⟩_β − F|`.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub initial_bracket_halfwidth: f64,
}

impl SolverConfig {
    /// Defaults for exact (deterministic, noise-free) objectives.
    pub fn exact() -> Self {
        SolverConfig {
            tolerance: 1e-8,
            max_iterations: 200,
            initial_bracket_halfwidth: 1.0,
        }
    }

    /// Defaults for objectives evaluated on a Monte Carlo sample bank.
    pub fn monte_carlo() -> Self {
        SolverConfig {
            tolerance: 1e-4,
            ..Self::exact()
        }
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) || !self.tolerance.is_finite() {
            return Err(Error::InvalidInput(format!(
                "solver tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidInput("max_iterations must be at least 1".into()));
        }
        if !(self.initial_bracket_halfwidth > 0.0) || !self.initial_bracket_halfwidth.is_finite() {
            return Err(Error::InvalidInput(format!(
                "initial bracket halfwidth must be positive, got {}",
                self.initial_bracket_halfwidth
            )));
        }
        Ok(())
    }
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self::exact()
    }
}

/// Result of solving `⟨f⟩_β = F` for β.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaSolution {
    pub beta: f64,
    /// `|⟨f⟩_β − F|` at `beta`.
    pub residual: f64,
    /// Number of objective evaluations.
    pub iterations: usize,
    /// Final bracket; always contains `beta`.
    pub bracket: (f64, f64),
    pub converged: bool,
    /// Effective sample size at the solution (Monte Carlo objectives only).
    pub ess_at_solution: Option<f64>,
}

/// Solve `objective(β).0 = target` starting from β = 0.
///
/// `objective` returns `(⟨f⟩_β, var_β(f))` and must be nondecreasing in β.
pub fn solve_beta<F>(objective: F, target: f64, config: &SolverConfig) -> Result<BetaSolution>
where
    F: FnMut(f64) -> Result<(f64, f64)>,
{
    solve_beta_from(objective, target, 0.0, config)
}

/// Same as [`solve_beta`] with an explicit starting multiplier.
pub fn solve_beta_from<F>(
    mut objective: F,
    target: f64,
    start: f64,
    config: &SolverConfig,
) -> Result<BetaSolution>
where
    F: FnMut(f64) -> Result<(f64, f64)>,
{
    config.validate()?;
    if !target.is_finite() {
        return Err(Error::InvalidInput(format!("target must be finite, got {target}")));
    }
    if !start.is_finite() || start.abs() > BETA_GUARD {
        return Err(Error::InvalidInput(format!("starting multiplier {start} out of range")));
    }
    let tol = config.tolerance;
    let mut iterations = 0usize;
    let mut max_variance = 0.0f64;

    let mut eval = |beta: f64, iterations: &mut usize| -> Result<(f64, f64)> {
        let (mean, var) = objective(beta)?;
        *iterations += 1;
        if !mean.is_finite() || !var.is_finite() {
            return Err(Error::NumericalOverflow);
        }
        Ok((mean - target, var.max(0.0)))
    };

    let done = |beta: f64, g: f64, iterations: usize, bracket: (f64, f64)| BetaSolution {
        beta,
        residual: g.abs(),
        iterations,
        bracket,
        converged: true,
        ess_at_solution: None,
    };

    let (g0, d0) = eval(start, &mut iterations)?;
    max_variance = max_variance.max(d0);
    if g0.abs() <= tol {
        return Ok(done(start, g0, iterations, (start, start)));
    }

    // Bracket expansion: walk in the direction that moves the mean toward
    // the target, doubling the step until the residual changes sign.
    let direction = if g0 < 0.0 { 1.0 } else { -1.0 };
    let mut inner = (start, g0, d0);
    let mut step = config.initial_bracket_halfwidth;
    let outer = loop {
        let candidate = (start + direction * step).clamp(-BETA_GUARD, BETA_GUARD);
        let (g, d) = eval(candidate, &mut iterations)?;
        max_variance = max_variance.max(d);
        if g.abs() <= tol {
            let bracket = ordered(inner.0, candidate);
            return Ok(done(candidate, g, iterations, bracket));
        }
        if g.signum() != g0.signum() {
            break (candidate, g, d);
        }
        if candidate.abs() >= BETA_GUARD {
            if max_variance < DEGENERATE_VARIANCE {
                return Err(Error::StalledAtDegenerate);
            }
            let (g_other, _) = eval(-candidate, &mut iterations)?;
            let (a, b) = ordered(g + target, g_other + target);
            return Err(Error::UnattainableTarget { target, lo: a, hi: b });
        }
        inner = (candidate, g, d);
        step *= 2.0;
    };

    // Orient so that g(lo) < 0 < g(hi).
    let (mut lo, mut hi) = if inner.1 < 0.0 {
        (inner, outer)
    } else {
        (outer, inner)
    };
    let mut best = if lo.1.abs() <= hi.1.abs() { lo } else { hi };
    let mut last_residual = f64::INFINITY;

    while iterations < config.max_iterations {
        let width = hi.0 - lo.0;
        if width <= f64::EPSILON * lo.0.abs().max(hi.0.abs()).max(1.0) {
            break;
        }
        let mid = 0.5 * (lo.0 + hi.0);
        let newton = if best.2 > DEGENERATE_VARIANCE {
            best.0 - best.1 / best.2
        } else {
            f64::NAN
        };
        let use_newton = newton.is_finite()
            && newton > lo.0
            && newton < hi.0
            && best.1.abs() <= 0.5 * last_residual;
        let x = if use_newton { newton } else { mid };
        last_residual = best.1.abs();

        let (g, d) = eval(x, &mut iterations)?;
        max_variance = max_variance.max(d);
        let point = (x, g, d);
        if g.abs() <= tol {
            return Ok(done(x, g, iterations, (lo.0, hi.0)));
        }
        if g < 0.0 {
            lo = point;
        } else {
            hi = point;
        }
        if g.abs() < best.1.abs() {
            best = point;
        }
    }

    if max_variance < DEGENERATE_VARIANCE {
        return Err(Error::StalledAtDegenerate);
    }
    Err(Error::MaxIterations {
        best: BetaSolution {
            beta: best.0,
            residual: best.1.abs(),
            iterations,
            bracket: (lo.0, hi.0),
            converged: false,
            ess_at_solution: None,
        },
    })
}

fn ordered(a: f64, b: f64) -> (f64, f64) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// Mean and variance of the two-point tilted law on {0.25, 0.75} with
    /// base weights (0.25, 0.75): the coin example after observing heads.
    fn coin(beta: f64) -> Result<(f64, f64)> {
        let lw = [0.25f64.ln() + 0.25 * beta, 0.75f64.ln() + 0.75 * beta];
        let m = lw[0].max(lw[1]);
        let w = [(lw[0] - m).exp(), (lw[1] - m).exp()];
        let z = w[0] + w[1];
        let p = [w[0] / z, w[1] / z];
        let mean = 0.25 * p[0] + 0.75 * p[1];
        let var = 0.25f64.powi(2) * p[0] + 0.75f64.powi(2) * p[1] - mean * mean;
        Ok((mean, var))
    }

    #[test]
    fn two_point_closed_form() {
        let sol = solve_beta(coin, 0.5, &SolverConfig::exact().with_tolerance(1e-12)).unwrap();
        assert!(sol.converged);
        assert_abs_diff_eq!(sol.beta, -2.0 * 3f64.ln(), epsilon = 1e-8);
        assert!(sol.bracket.0 <= sol.beta && sol.beta <= sol.bracket.1);
    }

    #[test]
    fn root_at_origin_is_immediate() {
        let sol = solve_beta(coin, 0.625, &SolverConfig::exact()).unwrap();
        assert_eq!(sol.beta, 0.0);
        assert!(sol.iterations <= 2);
    }

    #[test]
    fn restart_at_solution_is_idempotent() {
        let cfg = SolverConfig::exact();
        let first = solve_beta(coin, 0.4, &cfg).unwrap();
        let again = solve_beta_from(coin, 0.4, first.beta, &cfg).unwrap();
        assert_eq!(again.iterations, 1);
        assert_eq!(again.beta, first.beta);
    }

    #[test]
    fn target_outside_range_is_unattainable() {
        match solve_beta(coin, 0.9, &SolverConfig::exact()) {
            Err(Error::UnattainableTarget { lo, hi, .. }) => {
                assert_abs_diff_eq!(lo, 0.25, epsilon = 1e-9);
                assert_abs_diff_eq!(hi, 0.75, epsilon = 1e-9);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn flat_objective_stalls() {
        let r = solve_beta(|_| Ok((1.0, 0.0)), 2.0, &SolverConfig::exact());
        assert_eq!(r, Err(Error::StalledAtDegenerate));
        // constant objective hitting the target is the β = 0 convention
        let ok = solve_beta(|_| Ok((1.0, 0.0)), 1.0, &SolverConfig::exact()).unwrap();
        assert_eq!(ok.beta, 0.0);
    }

    #[test]
    fn iteration_budget_returns_best_so_far() {
        let cfg = SolverConfig {
            tolerance: 1e-15,
            max_iterations: 4,
            initial_bracket_halfwidth: 1.0,
        };
        match solve_beta(coin, 0.3, &cfg) {
            Err(Error::MaxIterations { best }) => {
                assert!(!best.converged);
                assert!(best.bracket.0 <= best.beta && best.beta <= best.bracket.1);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bracket_stays_monotone() {
        let mut seen = Vec::new();
        let target = 0.7;
        let sol = solve_beta(
            |b| {
                let r = coin(b)?;
                seen.push((b, r.0));
                Ok(r)
            },
            target,
            &SolverConfig::exact(),
        )
        .unwrap();
        assert!(sol.beta > 0.0);
        seen.sort_by(|a, b| a.0.total_cmp(&b.0));
        for w in seen.windows(2) {
            assert!(w[1].1 >= w[0].1 - 1e-15);
        }
        let (lo, hi) = sol.bracket;
        assert!(coin(lo).unwrap().0 <= target + 1e-8);
        assert!(coin(hi).unwrap().0 >= target - 1e-8);
    }

    #[test]
    fn rejects_bad_config() {
        let cfg = SolverConfig::exact().with_tolerance(0.0);
        assert!(matches!(solve_beta(coin, 0.5, &cfg), Err(Error::InvalidInput(_))));
    }
}
