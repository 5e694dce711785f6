//! Fisher-KPP fronts in the Bramson moving frame.
//!
//! The crate integrates `u_t = Δu + u(1-u)` in one and two space dimensions,
//! tracks level sets of the solution, and compares the transverse front
//! displacement against a one-dimensional heat flow. The self-similar
//! machinery of the diffusive zone (the operators, the principal
//! eigenfunction split, the linear Dirichlet problem) lives in [`diffusive`].

// `!(x > 0.0)` is used on purpose: it rejects NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diffusive;
pub mod front;
pub mod heat;
pub mod kpp1d;
pub mod kpp2d;
pub mod numerics;
pub mod runner;
pub mod scenarios;
pub mod wave;

pub use numerics::{Field1D, Field2D, Frame, Grid1D, Grid2D};
