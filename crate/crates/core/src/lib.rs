//! Winding-number indices of plane vector fields along closed curves, the
//! uniformization of a constant torus field onto a planar annulus, and first
//! integrals built from uniformizing maps.
//!
//! * [`expr`]: expression language used to define fields, maps and curves.
//! * [`geometry`]: torus points, closed curves and their lap counts.
//! * [`field`]: scalar/vector fields, maps, Jacobians and pushforwards.
//! * [`index`]: the winding index by quadrature and by angle unwrapping.
//! * [`uniformization`]: the maps `ρ`, `τ`, `σ`, `φ` and the index-one check.
//! * [`firstintegral`]: gradient systems, grid integration and `X(h)` residuals.
//! * [`registry`]: named built-in fields.
//! * [`plot`]: deterministic SVG output.

// `!(a > b)` is deliberate throughout: NaN must fail every guard.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod expr;
pub mod field;
pub mod firstintegral;
pub mod geometry;
pub mod index;
pub mod plot;
pub mod registry;
pub mod uniformization;

pub use error::{Error, Result};

/// A point (or vector) of the plane, also used for torus lift coordinates.
pub type Point = nalgebra::Vector2<f64>;
/// 2×2 matrix, `[[f_x, f_y], [g_x, g_y]]` for Jacobians.
pub type Matrix = nalgebra::Matrix2<f64>;
