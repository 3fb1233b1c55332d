//! Godunov and Strang compositions of the transport and diffusion flows,
//! and the time-marching driver.

use std::fmt;
use std::str::FromStr;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::dynamics::{phi_a, phi_b_with, ModelParams, SubstepPolicy, Transport};
use crate::error::{Error, Result};
use crate::spectral::SpectralField;

/// Tolerance for snapshot times and step counts on the `dt` lattice.
pub const LATTICE_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeKind {
    /// `Φ_A(Δt) ∘ Φ_B(Δt)`, first order.
    Godunov,
    /// `Φ_B(Δt/2) ∘ Φ_A(Δt) ∘ Φ_B(Δt/2)`, second order.
    Strang,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 2] = [SchemeKind::Godunov, SchemeKind::Strang];

    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::Godunov => "godunov",
            SchemeKind::Strang => "strang",
        }
    }

    pub fn step(
        self,
        theta: &SpectralField,
        dt: f64,
        p: &ModelParams,
        policy: &SubstepPolicy,
    ) -> Result<SpectralField> {
        self.step_with(theta, dt, p, policy, Transport::Active)
    }

    #[doc(hidden)]
    pub fn step_with(
        self,
        theta: &SpectralField,
        dt: f64,
        p: &ModelParams,
        policy: &SubstepPolicy,
        transport: Transport,
    ) -> Result<SpectralField> {
        match self {
            SchemeKind::Godunov => godunov_step_with(theta, dt, p, policy, transport),
            SchemeKind::Strang => strang_step_with(theta, dt, p, policy, transport),
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "godunov" => Ok(SchemeKind::Godunov),
            "strang" => Ok(SchemeKind::Strang),
            other => Err(Error::Parse(format!(
                "unknown scheme {other:?}, expected \"godunov\" or \"strang\""
            ))),
        }
    }
}

fn check_step(dt: f64) -> Result<()> {
    if dt > 0.0 && dt.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("time step must be > 0, got {dt}")))
    }
}

/// One Godunov step: transport for `dt`, then exact diffusion for `dt`.
pub fn godunov_step(
    theta: &SpectralField,
    dt: f64,
    p: &ModelParams,
    policy: &SubstepPolicy,
) -> Result<SpectralField> {
    godunov_step_with(theta, dt, p, policy, Transport::Active)
}

fn godunov_step_with(
    theta: &SpectralField,
    dt: f64,
    p: &ModelParams,
    policy: &SubstepPolicy,
    transport: Transport,
) -> Result<SpectralField> {
    check_step(dt)?;
    let transported = phi_b_with(dt, theta, p, policy, transport)?;
    phi_a(dt, &transported, p)
}

/// One Strang step: half transport, full diffusion, half transport.
pub fn strang_step(
    theta: &SpectralField,
    dt: f64,
    p: &ModelParams,
    policy: &SubstepPolicy,
) -> Result<SpectralField> {
    strang_step_with(theta, dt, p, policy, Transport::Active)
}

#[doc(hidden)]
pub fn strang_step_with(
    theta: &SpectralField,
    dt: f64,
    p: &ModelParams,
    policy: &SubstepPolicy,
    transport: Transport,
) -> Result<SpectralField> {
    check_step(dt)?;
    let first = phi_b_with(0.5 * dt, theta, p, policy, transport)?;
    let diffused = phi_a(dt, &first, p)?;
    phi_b_with(0.5 * dt, &diffused, p, policy, transport)
}

/// Recorded states of a splitting run.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<SpectralField>,
    pub params: ModelParams,
    pub scheme: SchemeKind,
    pub dt: f64,
}

impl Trajectory {
    pub fn final_state(&self) -> &SpectralField {
        self.states.last().expect("trajectory always holds the initial state")
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("trajectory always holds t = 0")
    }
}

/// Number of whole steps of size `dt` in `[0, t]`, with lattice tolerance.
pub fn step_count(t: f64, dt: f64) -> usize {
    (t / dt + LATTICE_TOL).floor() as usize
}

/// Whether `dt` divides `t` within [`LATTICE_TOL`].
pub fn divides(t: f64, dt: f64) -> bool {
    let ratio = t / dt;
    (ratio - ratio.round()).abs() <= LATTICE_TOL * ratio.max(1.0)
}

/// Marches `⌊T/dt⌋` steps of `scheme` from `theta0`.
///
/// The trajectory always holds `t = 0` and the final lattice time; any
/// `snapshot_times` in between are recorded too and must lie on the `dt`
/// lattice.
#[allow(clippy::too_many_arguments)]
pub fn evolve(
    scheme: SchemeKind,
    theta0: &SpectralField,
    t_final: f64,
    dt: f64,
    p: &ModelParams,
    policy: &SubstepPolicy,
    snapshot_times: &[f64],
) -> Result<Trajectory> {
    evolve_with(scheme, theta0, t_final, dt, p, policy, snapshot_times, Transport::Active)
}

#[doc(hidden)]
#[allow(clippy::too_many_arguments)]
pub fn evolve_with(
    scheme: SchemeKind,
    theta0: &SpectralField,
    t_final: f64,
    dt: f64,
    p: &ModelParams,
    policy: &SubstepPolicy,
    snapshot_times: &[f64],
    transport: Transport,
) -> Result<Trajectory> {
    if !(t_final > 0.0) || !t_final.is_finite() {
        return Err(Error::Configuration(format!("final time must be > 0, got {t_final}")));
    }
    check_step(dt)?;
    if dt > t_final * (1.0 + LATTICE_TOL) {
        return Err(Error::Configuration(format!(
            "dt = {dt} exceeds the final time {t_final}"
        )));
    }
    theta0.ensure_mean_zero()?;
    let steps = step_count(t_final, dt);

    let mut wanted = vec![false; steps + 1];
    wanted[0] = true;
    wanted[steps] = true;
    for &ts in snapshot_times {
        let ratio = ts / dt;
        let index = ratio.round();
        let on_lattice = (ratio - index).abs() <= LATTICE_TOL * ratio.abs().max(1.0);
        if !on_lattice || index < 0.0 || index as usize > steps {
            return Err(Error::Configuration(format!(
                "snapshot time {ts} is not a multiple of dt = {dt} within [0, {t_final}]"
            )));
        }
        wanted[index as usize] = true;
    }

    let mut times = vec![0.0];
    let mut states = vec![theta0.clone()];
    let mut state = theta0.clone();
    for n in 1..=steps {
        state = scheme.step_with(&state, dt, p, policy, transport)?;
        if wanted[n] {
            times.push(n as f64 * dt);
            states.push(state.clone());
        }
    }
    Ok(Trajectory {
        times,
        states,
        params: *p,
        scheme,
        dt,
    })
}

/// Logs a warning when `dt` exceeds the configured small-step threshold.
pub fn warn_if_large_step(dt: f64, max_dt: f64) {
    if dt > max_dt {
        warn!("dt = {dt} exceeds the configured maximum {max_dt}; splitting estimates assume small steps");
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{forward_transform, sobolev_norm, Grid};
    use rustfft::num_complex::Complex64;

    fn grid(n: usize) -> Grid {
        Grid::new(n).unwrap()
    }

    fn field(g: &Grid, f: impl Fn(f64, f64) -> f64) -> SpectralField {
        forward_transform(&g.sample(f), g).unwrap()
    }

    fn rel_l2(a: &SpectralField, b: &SpectralField) -> f64 {
        sobolev_norm(&a.sub(b).unwrap(), 0.0) / sobolev_norm(b, 0.0)
    }

    fn p11() -> ModelParams {
        ModelParams::new(1.0, 1.0).unwrap()
    }

    #[test]
    fn scheme_names_round_trip() {
        for s in SchemeKind::ALL {
            assert_eq!(s.name().parse::<SchemeKind>().unwrap(), s);
        }
        assert!("both".parse::<SchemeKind>().is_err());
    }

    #[test]
    fn steady_mode_decays_exactly() {
        let g = grid(16);
        let cos_x = field(&g, |x, _| x.cos());
        let p = p11();
        let dt = 0.05;
        let policy = SubstepPolicy::for_step(dt);
        for scheme in SchemeKind::ALL {
            let out = scheme.step(&cos_x, dt, &p, &policy).unwrap();
            assert!(rel_l2(&out, &cos_x.scaled((-dt).exp())) < 1e-14);
        }
        let mut state = cos_x.clone();
        for _ in 0..7 {
            state = godunov_step(&state, dt, &p, &policy).unwrap();
        }
        assert!(rel_l2(&state, &cos_x.scaled((-7.0 * dt).exp())) < 1e-10);
    }

    #[test]
    fn tiny_step_is_near_identity() {
        let g = grid(32);
        let theta = field(&g, |x, y| x.sin() * y.sin() + y.cos());
        let dt = 1e-8;
        let out = godunov_step(&theta, dt, &p11(), &SubstepPolicy::for_step(dt)).unwrap();
        assert!(rel_l2(&out, &theta) < 1e-6);
    }

    #[test]
    fn strang_equals_godunov_without_transport() {
        let g = grid(32);
        let theta = field(&g, |x, _| x.cos());
        let p = ModelParams::new(1.5, 2.0).unwrap();
        let policy = SubstepPolicy::for_step(0.1);
        let a = strang_step(&theta, 0.1, &p, &policy).unwrap();
        let b = godunov_step(&theta, 0.1, &p, &policy).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn strang_frozen_velocity_single_mode() {
        let g = grid(16);
        let mode = SpectralField::from_modes(
            &g,
            &[((2, 1), Complex64::new(0.5, -0.25)), ((-2, -1), Complex64::new(0.5, 0.25))],
        )
        .unwrap();
        let dt = 0.1;
        for alpha in [0.5, 1.0, 2.0] {
            let p = ModelParams::new(alpha, 1.0).unwrap();
            let out = strang_step_with(&mode, dt, &p, &SubstepPolicy::for_step(dt), Transport::Frozen)
                .unwrap();
            let factor = (-dt * 5f64.powf(alpha / 2.0)).exp();
            assert!(rel_l2(&out, &mode.scaled(factor)) < 1e-14);
        }
    }

    #[test]
    fn evolve_records_lattice() {
        let g = grid(16);
        let theta = field(&g, |x, _| x.cos());
        let p = p11();
        let policy = SubstepPolicy::for_step(0.1);
        let traj = evolve(SchemeKind::Godunov, &theta, 1.0, 0.1, &p, &policy, &[0.0, 0.3]).unwrap();
        assert_eq!(traj.times.len(), traj.states.len());
        assert_eq!(traj.times[0], 0.0);
        assert_eq!(traj.states[0], theta);
        assert!((traj.times[1] - 0.3).abs() < 1e-12);
        assert!((traj.final_time() - 1.0).abs() < 1e-12);
        assert!(rel_l2(traj.final_state(), &theta.scaled((-1.0f64).exp())) < 1e-10);

        let one = evolve(SchemeKind::Strang, &theta, 0.5, 0.5, &p, &policy, &[]).unwrap();
        assert_eq!(one.times, vec![0.0, 0.5]);
    }

    #[test]
    fn evolve_stops_on_lattice() {
        let g = grid(16);
        let theta = field(&g, |x, _| x.cos());
        let traj = evolve(SchemeKind::Godunov, &theta, 1.0, 0.3, &p11(), &SubstepPolicy::for_step(0.3), &[])
            .unwrap();
        assert!((traj.final_time() - 0.9).abs() < 1e-12);
    }

    #[test]
    fn evolve_rejects_off_lattice_snapshot() {
        let g = grid(16);
        let theta = field(&g, |x, _| x.cos());
        let err = evolve(
            SchemeKind::Godunov,
            &theta,
            1.0,
            0.1,
            &p11(),
            &SubstepPolicy::for_step(0.1),
            &[0.25],
        )
        .unwrap_err();
        assert!(matches!(err, Error::Configuration(_)));
    }

    #[test]
    fn evolve_matches_manual_steps_bitwise() {
        let g = grid(32);
        let theta = field(&g, |x, y| x.sin() * y.sin() + y.cos());
        let p = p11();
        let dt = 0.1;
        let policy = SubstepPolicy::for_step(dt);
        let all: Vec<f64> = (0..=3).map(|i| i as f64 * dt).collect();
        for scheme in SchemeKind::ALL {
            let traj = evolve(scheme, &theta, 0.3, dt, &p, &policy, &all).unwrap();
            let mut state = theta.clone();
            for recorded in &traj.states[1..] {
                state = scheme.step(&state, dt, &p, &policy).unwrap();
                assert_eq!(&state, recorded);
            }
            for s in &traj.states {
                assert!(s.relative_mean() <= 1e-12);
            }
        }
    }
}
