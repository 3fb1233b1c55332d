//! Pseudo-spectral solver for the two-dimensional generalized active scalar
//! equation
//!
//! ```text
//! θ_t + u·∇θ + Λ^α θ = 0,   u = curl Λ^{-β} θ,   α ∈ (0, 2], β ∈ [1, 2]
//! ```
//!
//! on the `2π`-periodic torus, advanced by Godunov or Strang operator
//! splitting and checked against an unsplit integrating-factor reference.
//! `β = 1` is the surface quasi-geostrophic equation and `α = β = 2` the
//! Navier–Stokes equations in vorticity form.

pub mod analysis;
pub mod dynamics;
pub mod error;
pub mod harness;
pub mod spectral;
pub mod splitting;

pub use analysis::{
    commutator_g, convergence_study, error_norm, fit_order, ConvergenceReport, ErrorSample, OrderFit,
};
pub use dynamics::{apply_a, apply_b, phi_a, phi_b, reference_solve, ModelParams, SubstepPolicy};
pub use error::{Error, Result};
pub use rustfft::num_complex::Complex64;
pub use spectral::{
    dealias, derivative_sum_norm, forward_transform, fractional_laplacian, gradient,
    inverse_transform, sobolev_norm, velocity, Grid, SpectralField, VelocityField,
};
pub use splitting::{evolve, godunov_step, strang_step, SchemeKind, Trajectory};
