//! Finite-difference and finite-volume scheme laboratory.
//!
//! The crate implements explicit upwind schemes for linear transport on
//! nonuniform 1D meshes, the implicit two-point-flux scheme for the heat
//! equation, monotone schemes for scalar conservation laws, and the MAC
//! staggered discretization of the 2D mass equation. Each module carries the
//! diagnostics needed to check stability, consistency, conservativity and
//! Lax–Wendroff consistency through refinement studies; [`harness`] wires
//! them into reproducible experiments.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod harness;
pub mod heat1d;
pub mod hyperbolic1d;
pub mod mac2d;
pub mod mesh;
pub mod quadrature;
pub mod smooth;
pub mod transport1d;

pub use error::{Error, Result};
pub use mesh::{CellField, Mesh1D, TimeGrid};
