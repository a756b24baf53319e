//! Numerical pluripotential theory in `C^n` (practically `n <= 2`) and on `CP^1`.

pub mod acceptance;
pub mod capacity;
pub mod fit;
pub mod geometry;
pub mod point;
pub mod potential;
pub mod projective;
pub mod regularity;
pub mod siciak;
pub mod theorems;

pub use geometry::{CompactSet, Domain, PointCloud};
pub use point::Point;
