//! The diffusive zone `x ~ sqrt(t)` in self-similar variables
//! `xi = x / sqrt(t)`, `tau = ln t`: the operators of the linearized
//! problem, the projection on their null mode, the forced Dirichlet problem
//! with fast transverse diffusion, and barrier diagnostics for KPP runs.

mod barrier;
mod dirichlet;
mod operators;
mod transform;

pub use barrier::{barrier_check, BarrierPair, DEFAULT_BARRIER_WINDOW};
pub use dirichlet::{
    localized_decay, run_dirichlet, symmetrized_decay, DecompositionRecord, DirichletProblem, Forcing, TimeCoefficient,
};
pub use operators::{
    apply_selfsimilar_operator, apply_symmetrized_operator, apply_transverse_operator, null_mode, null_mode_residual,
    project_null_mode, quadratic_form, NULL_MODE_NORM,
};
pub use transform::{aligned_xi_grid, from_selfsimilar, to_selfsimilar, SelfSimilarField};

use thiserror::Error;

use crate::numerics::{Frame, NumericsError};

/// Far end of the default self-similar domain.
pub const DEFAULT_XI_MAX: f64 = 12.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiffusiveError {
    #[error("self-similar domain ends at xi = {xi_max}, need at least 8")]
    DomainTooShort { xi_max: f64 },
    #[error("x = {x} lies outside the field's grid")]
    OutOfDomain { x: f64 },
    #[error("expected a moving-frame field, got {0:?}")]
    FrameMismatch(Frame),
    #[error("invalid Dirichlet problem: {0}")]
    InvalidProblem(String),
    #[error("initial datum outside the weighted space: {0}")]
    InvalidInitialData(String),
    #[error("no grid points in the barrier window [{lo}, {hi}]")]
    WindowEmpty { lo: f64, hi: f64 },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}
