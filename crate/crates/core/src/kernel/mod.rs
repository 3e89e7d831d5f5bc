//! Exact low-level geometry shared by every other module.

pub mod dyadic;
pub mod interval;
pub mod polygon;
pub mod sum;

pub use dyadic::{Dyadic, DyadicError};
pub use interval::{Interval, IntervalUnion};
pub use polygon::{ConvexPolygon, HalfPlane, Point};
pub use sum::{compensated_sum, CompensatedSum};
