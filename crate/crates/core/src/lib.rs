//! Exact min-sum (max-sum) message passing for zero-one packing and covering
//! integer programs with box constraints, together with the machinery needed
//! to check it against LP relaxations: an exact vertex-enumeration LP solver,
//! a computation-tree dynamic program, and graph lifts.
//!
//! All numeric code is generic over [`Scalar`] / [`Field`]; the aliases below
//! fix the scalar to arbitrary-precision rationals.

pub mod error;
pub mod extended;
pub mod factor_graph;
pub mod graph;
pub mod harness;
pub mod instances;
pub mod lifts;
pub mod lp_exact;
pub mod minsum;
pub mod scalar;
pub mod tree_dp;

pub use error::{Error, Result};
pub use extended::ExtendedValue;
pub use scalar::{Field, Scalar};

/// Arbitrary-precision rational.
pub type Rational = num_rational::BigRational;
/// Rational with machine-word numerator and denominator.
pub type SmallRational = num_rational::Rational64;

pub type Instance = instances::ProblemInstance<Rational>;
pub type Extended = ExtendedValue<Rational>;
pub type FactorGraph = factor_graph::FactorGraph<Rational>;
pub type LpResult = lp_exact::LpResult<Rational>;
pub type InstanceLift = lifts::InstanceLift<Rational>;
pub type OscillationReport = harness::OscillationReport<Rational>;
pub type ConvergenceReport = harness::ConvergenceReport<Rational>;
