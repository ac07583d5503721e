//! Planar periodic frameworks: rigidity and stress spaces, periodic Maxwell
//! liftings, periodic pointed pseudo-triangulations, sublattice relaxation and
//! expansive one-degree-of-freedom deformations.

pub mod deformation;
pub mod error;
pub mod fixtures;
pub mod framework;
pub mod json;
pub mod lifting;
pub mod linalg;
pub mod ppt;
pub mod relax;
pub mod rigidity;
pub mod svg;
pub mod topology;

pub use error::{Error, ErrorClass, Result};
pub use framework::{EdgeOrbit, LatticeBasis, PeriodicFramework, Shift, TileRange, Vec2};
