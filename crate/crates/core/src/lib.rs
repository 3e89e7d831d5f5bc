//! Cantor-graph sets with prescribed Favard-length decay, and the numerics
//! that measure it.
//!
//! The crate builds the sets exactly over dyadic rationals
//! ([`construction`]), measures projections of their neighborhoods
//! ([`projection`]), bounds the same quantity through point-line duality
//! ([`duality`]) and probes the geometry of the limiting graph
//! ([`diagnostics`]).

pub mod construction;
pub mod diagnostics;
pub mod duality;
pub mod error;
pub mod kernel;
pub mod projection;
pub mod report;
pub mod svg;

pub use error::{Error, Result};
