//! Exact finite-window simulation of Boolean disc models with spatially
//! correlated radii, and the estimators built on top of them.
//!
//! The model: a Poisson point process of intensity `lambda`, each point
//! centered in a closed disc whose radius is either the value of a random
//! field at the point (geostatistical marking) or an independent draw from
//! the field's pointwise law (iid marking). Everything downstream — coverage,
//! crossings, origin clusters, correlation proxies, threshold brackets — is
//! computed from realizations on finite windows with explicit failure
//! budgets, and is deterministic given a seed, independent of thread count.
//!
//! All geometry is generic over the scalar type (`f32` or `f64`) through
//! [`Scalar`]; the aliases at the crate root fix `f64`, which is what the
//! command-line tools use.

mod error;
mod raster;
mod scalar;
mod union_find;

pub mod boolean;
pub mod estimators;
pub mod fields;
pub mod geom;
pub mod model;
pub mod sampling;
pub mod threshold;

pub use error::{Error, Result};
pub use raster::{Connectivity, CrossingAnswer, FloodAxis};
pub use scalar::Scalar;

/// Default-precision aliases for the common types.
pub type Point = geom::Point2<f64>;
pub type Window = geom::Rect<f64>;
pub type Ball = geom::Disc<f64>;
pub type RadiusLaw = fields::RadialDistribution<f64>;
pub type Field = fields::FieldRealization<f64>;
pub type Occupied = boolean::OccupiedRealization<f64>;
pub type PointSample = sampling::MarkedPointSet<f64>;
