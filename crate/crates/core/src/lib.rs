//! Persistence of heavy-tailed sample averages.
//!
//! The crate estimates `P_n = P(S_k / k ∈ A for all k ≤ n)` for a centred random
//! walk with regularly varying steps and a compact convex target `A` bounded away
//! from the origin, and computes the lognormal-type decay exponent
//! `φ = (α − 1) / (2 log r*)` from the geometry of `A`.
//!
//! Modules:
//! - [`sampler`]: step laws (multivariate Pareto-radial, two-sided 1-D,
//!   independent components) and the Hill tail-index estimator.
//! - [`geometry`]: convex bodies, radial bounds, the `r*` convex program and
//!   projection bounds.
//! - [`engine`]: direct Monte Carlo and fixed-effort multilevel splitting,
//!   level schedules, exponent regression, windowed persistence.
//! - [`path`]: the deterministic plateau-and-jump skeleton in one dimension.
//! - [`bench`]: numerical checks of the constructions used in the bounds.

pub mod bench;
pub mod engine;
mod error;
pub mod geometry;
pub mod linalg;
pub mod path;
pub mod rng;
pub mod sampler;

pub use error::{Error, Result};
