//! Numerical toolkit for analyzing Lipschitz maps from the unit cube into
//! metric spaces on regular grids.
//!
//! The crate computes, at desk scale, the objects that control whether such
//! a map factors through a metric tree:
//!
//! - polyhedral seminorms with rank, kernel, and Jacobian ([`seminorm`]),
//! - grid-sampled maps, componentwise gradients, metric-derivative fields,
//!   and Kuratowski-style landmark embeddings ([`sampled_map`]),
//! - Hausdorff content of image point clouds, dyadic mapping content by
//!   dynamic programming, and pointwise density estimates ([`content`]),
//! - the pullback quasimetric, quotient space with factor maps, and tree
//!   certification by four-point defects and loop areas ([`quotient`]),
//! - curve length/speed, oriented area, Stokes cross-checks, and area/coarea
//!   identities ([`area`]),
//! - Heisenberg-group arithmetic, horizontal lifts, and the projection area
//!   formula ([`heisenberg`]).

pub mod area;
pub mod builtin;
pub mod content;
pub mod error;
pub mod grid;
pub mod halfspace;
pub mod heisenberg;
pub mod mapio;
pub mod quotient;
pub mod sampled_map;
pub mod seminorm;
pub mod target;
mod unionfind;
mod vecmath;

pub use error::{Error, Result};
pub use vecmath::unit_ball_volume;
