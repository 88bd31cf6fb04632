//! Maximum relative entropy (ME) inference for species abundances.
//!
//! Observed counts and a moment constraint on the unknown species
//! probabilities are processed together. The counts enter as a data
//! constraint on a multinomial model, the moment constraint as an
//! exponential tilt `e^{β f(p)}` of the resulting posterior, and β is chosen
//! so that the posterior satisfies `⟨f⟩ = F`. With no moment constraint the
//! update reduces to Bayes' rule.
//!
//! Modules:
//!
//! - [`discrete`]: the update on a finite parameter grid, computed exactly.
//! - [`simplex`]: the partition function `ζ(β)` of the multinomial model
//!   over the probability simplex, by importance sampling from the
//!   Dirichlet posterior, with a quadrature oracle for 2 or 3 species.
//! - [`solver`]: safeguarded Newton/bisection for the multiplier β.
//! - [`diversity`]: Shannon and Simpson indices and `S_ME = log ζ − β F`.

pub mod discrete;
pub mod diversity;
mod error;
pub mod logspace;
pub mod simplex;
pub mod solver;

pub use discrete::{
    attainable_range, bayes_update, me_update, DiscreteModel, DiscretePosterior, MomentSpecDiscrete,
};
pub use diversity::{me_diversity, shannon, simpson, Diagnostics, DiversityReport, SamplingConfig};
pub use error::{Error, Result};
pub use simplex::{
    draw_bank, draw_bank_with_threads, grid_oracle, grid_quadrature, log_multinomial,
    log_zeta_at_zero, posterior_means, zeta_at, MomentConstraint, PosteriorMeans, PriorSpec,
    SampleBank, SpeciesCounts, TiltedBank, ZetaEstimate,
};
pub use solver::{solve_beta, solve_beta_from, BetaSolution, SolverConfig};
