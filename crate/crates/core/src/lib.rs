//! Particle approximation of conditional McKean–Vlasov equations.
//!
//! The limit dynamics have drift `Σ_j E[b^i_j(X) | X^j] + V^i(X)`; the
//! particle system replaces each conditional expectation with an
//! ε-floored Nadaraya–Watson estimate over the empirical measure. This crate
//! holds the numerics: mollification [`kernels`], coefficient [`models`] and
//! their oracles, the [`nwdrift`] functional with exact naive and cell-list
//! evaluation, the Euler–Maruyama [`simulate`] loop with counter-based noise,
//! information [`divergences`], and the bandwidth/floor [`schedule`].
//!
//! The crate is `no_std` (it needs `alloc`). Parallel execution is plugged in
//! through [`exec::Executor`]; results never depend on the executor.
//!
//! Conventions used throughout:
//! - the bandwidth `h` is a **variance** scale: `K_h(z) = h^{-d/2} K(z/√h)`;
//! - total variation is the L¹ distance (values in `[0, 2]`), not the
//!   `sup |α(S) - β(S)|` convention;
//! - states are flat `m·d` vectors, block `j` occupying `[j*d, (j+1)*d)`.
#![cfg_attr(not(feature = "std"), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod divergences;
mod error;
pub mod exec;
pub mod kernels;
pub mod math;
pub mod models;
pub mod nwdrift;
pub mod rng;
pub mod schedule;
pub mod simulate;

pub use error::{Error, Result};
pub use exec::{Executor, Serial};
pub use kernels::{KernelId, KernelSpec, ScaledKernel};
pub use models::{Coefficients, Dependence, GaussianLaw, InitialLaw, ModelSpec, Preset};
pub use nwdrift::{DriftParams, Strategy, WeightedMeasure};
pub use simulate::{ParticleEnsemble, SimConfig, Trajectory};
