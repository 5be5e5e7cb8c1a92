//! Exact and statistical tools for coprime Diophantine approximation of
//! systems of linear forms on the torus.
//!
//! The geometry layer ([`torus`], [`measures`]) is generic over a
//! [`Scalar`]: exact [`Rational`] arithmetic is the reference engine, and
//! `f64`/`f32` instantiations run the same code for fast exploratory scans.

pub mod arith;
pub mod checks;
pub mod error;
pub mod measures;
pub mod montecarlo;
pub mod psi;
pub mod report;
pub mod sampling;
pub mod scalar;
pub mod series;
pub mod torus;
pub mod value;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Exact rational scalar.
pub type Rational = num_rational::BigRational;
pub type ExactArcs = torus::ArcUnion<Rational>;
pub type FastArcs = torus::ArcUnion<f64>;
pub type ExactApproxSet = torus::ApproxSet<Rational>;
