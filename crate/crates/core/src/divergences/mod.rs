//! Divergences between discrete laws, Gaussian closed forms, binned
//! ensembles, and the mollification entropy `H(p ‖ p ⋆ K_h)`.
//!
//! Total variation is the L¹ distance `Σ|a_i - b_i|`, which is twice the
//! `sup_S |α(S) - β(S)|` convention.

mod discrete;
mod gaussian;
mod histogram;
mod inequalities;
mod mollify;

pub use discrete::{chi2, d_p, kl, tv, DiscreteDistribution};
pub use gaussian::{gaussian_kl, gaussian_renyi_d};
pub use histogram::{histogram_tv, histogram_tv_samples, Axis, Histogram, HistogramGrid, Marginal, Overflow};
pub use inequalities::{inequality_suite, inequality_suite_with, InequalityReport, InequalityRow, Quantity};
pub use mollify::{mollification_entropy, Density1d};
