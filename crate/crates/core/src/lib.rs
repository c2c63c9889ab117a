//! Half-plane and disk capacity, hyperbolic neighborhoods, dyadic covers and
//! walk-on-spheres estimators.

pub mod capacity;
pub mod dyadic;
pub mod error;
pub mod geom;
pub mod hyperbolic;
pub mod mobius;
pub mod quadtree;
pub mod verify;
pub mod wos;

pub use error::{Error, Result};
pub use geom::{DiskCompact, HalfPlaneHull, Point, Rect, Shape, ShapeFile, ShapeSet, Space};
pub use quadtree::{AreaBounds, Tolerance};
