//! Illumination of polygons with fading light from a fixed set of guard
//! candidates.
//!
//! Two solvers share one geometry kernel:
//!
//! * [`discrete::solve_discrete`] builds the arrangement of visibility and
//!   ring curves, places witnesses in every feature and solves the step
//!   function LP, which gives a `1 + eps` approximation;
//! * [`continuous::solve_continuous`] runs a cutting loop on the exact fading
//!   function, searching for the darkest point by simplex partitioning.
//!
//! The kernel is generic over [`Scalar`]; `f64` is the default and
//! [`Rational`] gives exact predicates.

pub mod arrangement;
pub mod budget;
pub mod continuous;
pub mod discrete;
pub mod error;
pub mod fading;
pub mod geom;
pub mod instances;
pub mod lp;
pub mod scalar;
pub mod triangulate;
pub mod verify;
pub mod visibility;

pub use budget::Budget;
pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Rational = num_rational::BigRational;

pub type Point64 = geom::Point<f64>;
pub type PointQ = geom::Point<Rational>;
pub type Polygon64 = geom::PolygonWithHoles<f64>;
pub type PolygonQ = geom::PolygonWithHoles<Rational>;
pub type Triangle64 = geom::Triangle<f64>;
