//! Planted vector recovery in a random subspace.
//!
//! The crate generates instances where a Bernoulli–Rademacher vector is
//! hidden inside an otherwise uniformly random `n`-dimensional subspace of
//! `R^N`, recovers it with a centered degree-4 spectral statistic, runs the
//! matching detection tests, and evaluates the degree-`D` low-degree
//! advantage exactly.
//!
//! Module map:
//!
//! * [`model_gen`]: seedable instance generation for the Gaussian-basis and
//!   orthonormal-basis observation models and for the null/planted
//!   detection pair.
//! * [`spectral`]: the statistic, its leading eigenpair, thresholding rules
//!   and error metrics.
//! * [`detection`]: spectral-norm test, ℓ1/ℓ2 reduction test and empirical
//!   error rates.
//! * [`lowdeg`]: Hermite moments, sphere moments and the advantage
//!   computation with a brute-force oracle.
//! * [`harness`]: grid sweeps and CSV output.

pub mod detection;
pub mod error;
pub mod harness;
pub mod io;
pub mod lowdeg;
pub mod model_gen;
pub mod rng;
pub mod spectral;

pub use error::{PvError, Result};
pub use rng::SeedSpec;
