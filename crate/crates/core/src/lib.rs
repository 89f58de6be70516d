//! Age-of-Information scheduling over correlated channels, modelled as a
//! correlated multi-armed bandit.
//!
//! Every channel's success is a deterministic function of a shared latent
//! state drawn i.i.d. each slot. The crate provides:
//!
//! - [`instance`]: instance definitions, pseudo-rewards and the
//!   competitive-arm classification,
//! - [`policies`]: UCB, Thompson sampling (Beta and Gaussian), their
//!   correlated counterparts and the AoI-aware wrapper,
//! - [`simulator`]: seeded Monte-Carlo AoI episodes and regret estimation
//!   against a coupled oracle,
//! - [`bounds`]: numerical evaluation of the lower and upper AoI-regret
//!   bounds, including the horizon thresholds,
//! - [`report`]: the CSV formats written by the command-line tool.
//!
//! The instance and bound computations are generic over the scalar type.
//! Instances accept any [`Scalar`] (including exact rationals), bounds need a
//! [`num_traits::Float`]. The aliases below fix the common choices.

pub mod bounds;
pub mod error;
pub mod instance;
pub mod policies;
pub mod report;
pub mod rng;
pub mod scalar;
pub mod simulator;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Exact rational scalar used to check published instance values without
/// rounding.
pub type Rational = num_rational::Ratio<i64>;

pub type Instance = instance::BanditInstance<f64>;
pub type Summary = instance::InstanceSummary<f64>;
pub type ExactInstance = instance::BanditInstance<Rational>;
pub type ExactSummary = instance::InstanceSummary<Rational>;
pub type Instance32 = instance::BanditInstance<f32>;
pub type Summary32 = instance::InstanceSummary<f32>;
pub type BoundParams = bounds::BoundParams<f64>;
pub type BoundReport = bounds::BoundReport<f64>;
