//! Right-hand sides of `θ_t + u·∇θ + Λ^α θ = 0` and their flows.
//!
//! `A(θ) = -Λ^α θ` is solved exactly in Fourier space. `B(θ) = -u·∇θ` with
//! `u = curl Λ^{-β} θ` is integrated with classical RK4 on CFL-limited
//! substeps. The unsplit reference uses an integrating factor for `A` and
//! RK4 for the transformed transport term.

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{
    fractional_laplacian, gradient, laplacian_symbol, sobolev_norm, velocity, Grid, SpectralField,
};

/// Exponents of the active scalar family: `α` for dissipation, `β` for the velocity law.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub alpha: f64,
    pub beta: f64,
}

impl ModelParams {
    /// Checks `α ∈ (0, 2]` and `β ∈ [1, 2]`.
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 2.0) {
            return Err(Error::Validation(format!("alpha ∈ (0,2] required, got {alpha}")));
        }
        if !(1.0..=2.0).contains(&beta) {
            return Err(Error::Validation(format!("beta ∈ [1,2] required, got {beta}")));
        }
        Ok(Self { alpha, beta })
    }
}

/// How `Φ_B` picks its internal RK4 step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubstepPolicy {
    /// Upper bound on the transport substep.
    pub max_substep: f64,
    /// Courant fraction applied to `Δx / max|u|`.
    pub cfl_fraction: f64,
}

impl SubstepPolicy {
    pub const DEFAULT_CFL: f64 = 0.5;

    pub fn new(max_substep: f64, cfl_fraction: f64) -> Result<Self> {
        if !(max_substep > 0.0 && max_substep.is_finite()) {
            return Err(Error::Validation(format!(
                "max_substep > 0 required, got {max_substep}"
            )));
        }
        if !(cfl_fraction > 0.0 && cfl_fraction <= 1.0) {
            return Err(Error::Validation(format!(
                "cfl_fraction ∈ (0,1] required, got {cfl_fraction}"
            )));
        }
        Ok(Self {
            max_substep,
            cfl_fraction,
        })
    }

    /// Default policy for a splitting step `dt`: substeps of at most `dt/8`, CFL 0.5.
    pub fn for_step(dt: f64) -> Self {
        Self {
            max_substep: dt / 8.0,
            cfl_fraction: Self::DEFAULT_CFL,
        }
    }

    /// `min(max_substep, cfl_fraction·Δx/max|u|)`.
    pub fn substep(&self, grid: &Grid, max_speed: f64) -> f64 {
        if max_speed > 0.0 {
            self.max_substep
                .min(self.cfl_fraction * grid.spacing() / max_speed)
        } else {
            self.max_substep
        }
    }
}

/// Policy choice for runs at several step sizes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubstepRule {
    /// `max_substep = dt / 8` for each splitting step `dt`.
    PerStep { cfl_fraction: f64 },
    /// The same policy for every `dt`.
    Fixed(SubstepPolicy),
}

impl Default for SubstepRule {
    fn default() -> Self {
        SubstepRule::PerStep {
            cfl_fraction: SubstepPolicy::DEFAULT_CFL,
        }
    }
}

impl SubstepRule {
    pub fn policy_for(&self, dt: f64) -> SubstepPolicy {
        match *self {
            SubstepRule::PerStep { cfl_fraction } => SubstepPolicy {
                max_substep: dt / 8.0,
                cfl_fraction,
            },
            SubstepRule::Fixed(policy) => policy,
        }
    }
}

/// Selects the transport term. `Frozen` forces `u ≡ 0`, so `B ≡ 0`; it exists
/// so tests can isolate the diffusion half of a splitting step.
#[doc(hidden)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Transport {
    #[default]
    Active,
    Frozen,
}

/// `A(θ) = -Λ^α θ`.
pub fn apply_a(theta: &SpectralField, p: &ModelParams) -> Result<SpectralField> {
    Ok(fractional_laplacian(theta, p.alpha)?.scaled(-1.0))
}

/// `B(θ) = -u·∇θ`, product formed in physical space and dealiased.
pub fn apply_b(theta: &SpectralField, p: &ModelParams) -> Result<SpectralField> {
    let u = velocity(theta, p.beta)?;
    Ok(u.dot(&gradient(theta))?.scaled(-1.0))
}

fn heat_factor(t: f64, alpha: f64) -> impl Fn(i64, i64) -> f64 {
    move |k1, k2| (-t * laplacian_symbol(k1, k2, alpha)).exp()
}

/// Exact diffusion flow: `coeff(k) ↦ e^{-t|k|^α} coeff(k)`.
pub fn phi_a(t: f64, theta: &SpectralField, p: &ModelParams) -> Result<SpectralField> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("diffusion time must be >= 0, got {t}")));
    }
    if t == 0.0 {
        return Ok(theta.clone());
    }
    Ok(theta.apply_real_symbol(heat_factor(t, p.alpha)))
}

/// Transport flow `Φ_B(t, θ)` by RK4 on substeps chosen by `policy`.
pub fn phi_b(
    t: f64,
    theta: &SpectralField,
    p: &ModelParams,
    policy: &SubstepPolicy,
) -> Result<SpectralField> {
    phi_b_with(t, theta, p, policy, Transport::Active)
}

#[doc(hidden)]
pub fn phi_b_with(
    t: f64,
    theta: &SpectralField,
    p: &ModelParams,
    policy: &SubstepPolicy,
    transport: Transport,
) -> Result<SpectralField> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("transport time must be >= 0, got {t}")));
    }
    theta.ensure_mean_zero()?;
    if t == 0.0 || transport == Transport::Frozen {
        return Ok(theta.clone());
    }

    let speed = velocity(theta, p.beta)?.max_speed()?;
    let h_max = policy.substep(theta.grid(), speed);
    if !(h_max >= 1e-12 * t) {
        return Err(Error::Configuration(format!(
            "transport substep {h_max:.3e} underflows 1e-12 of the flow time {t}"
        )));
    }
    let steps = (t / h_max).ceil().max(1.0) as usize;
    let h = t / steps as f64;

    let h3_start = sobolev_norm(theta, 3.0);
    let mut state = theta.clone();
    for _ in 0..steps {
        state = rk4_step(&state, h, p)?;
    }
    let h3_end = sobolev_norm(&state, 3.0);
    if h3_end > 10.0 * h3_start {
        warn!(
            "transport H^3 norm grew {:.1}x over t = {t} (alpha = {}, beta = {}); \
             the discrete flow may be under-resolved",
            h3_end / h3_start,
            p.alpha,
            p.beta
        );
    }
    Ok(state)
}

fn rk4_step(theta: &SpectralField, h: f64, p: &ModelParams) -> Result<SpectralField> {
    let k1 = apply_b(theta, p)?;
    let k2 = apply_b(&theta.add_scaled(0.5 * h, &k1)?, p)?;
    let k3 = apply_b(&theta.add_scaled(0.5 * h, &k2)?, p)?;
    let k4 = apply_b(&theta.add_scaled(h, &k3)?, p)?;
    theta
        .add_scaled(h / 6.0, &k1)?
        .add_scaled(h / 3.0, &k2)?
        .add_scaled(h / 3.0, &k3)?
        .add_scaled(h / 6.0, &k4)
}

/// Number of reference steps of size `dt_ref` covering `t`.
fn lattice_steps(t: f64, dt_ref: f64) -> Result<usize> {
    if !(dt_ref > 0.0) || !dt_ref.is_finite() {
        return Err(Error::Configuration(format!("dt_ref must be > 0, got {dt_ref}")));
    }
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("time must be >= 0, got {t}")));
    }
    let ratio = t / dt_ref;
    let steps = ratio.round();
    if (ratio - steps).abs() > 1e-9 * ratio.max(1.0) {
        return Err(Error::Configuration(format!(
            "dt_ref = {dt_ref} does not divide t = {t}"
        )));
    }
    Ok(steps as usize)
}

/// Unsplit solution of the full equation at time `t`.
///
/// Lawson (integrating-factor) RK4: the diffusion factor `e^{-s|k|^α}` is
/// applied exactly and the transformed transport term is stepped with
/// classical RK4 of step `dt_ref`, which must divide `t`.
pub fn reference_solve(
    t: f64,
    theta0: &SpectralField,
    p: &ModelParams,
    dt_ref: f64,
) -> Result<SpectralField> {
    reference_solve_observed(t, theta0, p, dt_ref, |_, _| {})
}

/// [`reference_solve`] calling `observer(step, state)` after every step,
/// starting with `observer(0, θ₀)`.
pub fn reference_solve_observed(
    t: f64,
    theta0: &SpectralField,
    p: &ModelParams,
    dt_ref: f64,
    mut observer: impl FnMut(usize, &SpectralField),
) -> Result<SpectralField> {
    let steps = lattice_steps(t, dt_ref)?;
    theta0.ensure_mean_zero()?;
    observer(0, theta0);
    let h = dt_ref;
    let full = heat_factor(h, p.alpha);
    let half = heat_factor(0.5 * h, p.alpha);

    let mut state = theta0.clone();
    for step in 1..=steps {
        let k1 = apply_b(&state, p)?;
        let half_state = state.apply_real_symbol(&half);
        let k2 = apply_b(&half_state.add_scaled(0.5 * h, &k1.apply_real_symbol(&half))?, p)?;
        let k3 = apply_b(&half_state.add_scaled(0.5 * h, &k2)?, p)?;
        let k4 = apply_b(
            &state
                .apply_real_symbol(&full)
                .add_scaled(h, &k3.apply_real_symbol(&half))?,
            p,
        )?;
        let mid = k2.add(&k3)?.apply_real_symbol(&half);
        state = state
            .add_scaled(h / 6.0, &k1)?
            .apply_real_symbol(&full)
            .add_scaled(h / 3.0, &mid)?
            .add_scaled(h / 6.0, &k4)?;
        observer(step, &state);
    }
    Ok(state)
}
