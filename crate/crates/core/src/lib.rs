//! Numerical toolkit for the class `C(Ω)` of normalized analytic functions
//! `f(z) = z + a₂z² + …` on the unit disk with `1 + z f''/f' ∈ Ω`.
//!
//! The crate builds the extremal function `k_Ω` and random class members
//! from a conformal map `φ_Ω`, evaluates arclength and integral-mean
//! functionals on circles `|z| = r`, implements distribution functions,
//! symmetric decreasing rearrangements and star-functions on `[-π, π]`,
//! and checks subordination `log f' ≺ log k_Ω'` numerically. The
//! [`harness`] module strings these together into reproducible sweeps.
//!
//! Every analytic function is carried as a truncated Maclaurin series
//! ([`ComplexSeries`]); circle data come from FFT evaluation of the
//! series and are integrated with the periodic trapezoidal rule, or with
//! the high-order arc integrator in [`profile`] when an integral has to be
//! restricted to part of the circle.

pub mod arcs;
pub mod error;
pub mod functionals;
pub mod harness;
pub mod members;
pub mod omega;
pub mod profile;
pub mod series;
pub mod subordination;
pub mod symmetrization;

pub use arcs::ArcSet;
pub use error::{Error, Result};
pub use functionals::{CircleData, ConvexGauge, Sign, SubharmonicGauge};
pub use members::{MemberFunction, Provenance, SchwarzSampler, SchwarzSpec};
pub use omega::{DomainKind, DomainPolicy, OmegaDomain, StarlikeCheck};
pub use profile::PeriodicProfile;
pub use series::{CircleSamples, ComplexSeries, C64};
pub use symmetrization::{DistributionFn, SampledPeriodic, StepFunction};

/// Largest admissible evaluation radius.
pub const R_MAX: f64 = 0.95;
/// Default truncation order of every series.
pub const DEFAULT_ORDER: usize = 256;
/// Default number of samples on a circle.
pub const DEFAULT_GRID: usize = 4096;
/// Largest constant term tolerated by [`ComplexSeries::divide_by_z`].
pub const TOL_CONST: f64 = 1e-12;
/// Slack for the starlikeness probe `Re[zφ'/(φ-1)] ≥ -TOL_STAR`.
pub const TOL_STAR: f64 = 1e-9;
/// Largest imaginary part of a coefficient of `φ_Ω` for a real-symmetric domain.
pub const TOL_SYM: f64 = 1e-12;
/// Relative slack of every inequality check.
pub const INEQ_REL_TOL: f64 = 1e-8;
/// Absolute slack of identity checks at the default order.
pub const IDENTITY_ABS_TOL: f64 = 1e-9;
/// Floor applied to `log|w|` near zeros of `w`.
pub const LOG_CLAMP: f64 = -1e3;
/// Margins below this (relative) are examined as possible equality cases.
pub const NEAR_EQUALITY: f64 = 1e-6;

/// Default circle grid for a series of the given order: at least
/// `max(4096, 2(N+1))`, rounded up to a power of two.
pub fn default_grid(order: usize) -> usize {
    DEFAULT_GRID.max(2 * (order + 1)).next_power_of_two()
}
