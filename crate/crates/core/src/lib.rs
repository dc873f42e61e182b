pub mod error;
pub mod geometry;
pub mod halfline;
pub mod increments;
pub mod lattice;
pub mod mc;
pub mod potential;
pub mod quadrature;
pub mod rng;
pub mod special;
pub mod stats;

pub use error::{Error, Result};
pub use geometry::{ConeKind, ConeSpec, Point};
pub use stats::EstimateCI;
