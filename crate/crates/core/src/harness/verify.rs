//! Self-check suite behind `gsqg verify`.
//!
//! Each check prints one line: name, measured value, threshold, PASS/FAIL.

use std::fmt;

use crate::analysis::{commutator_with, FitOutcome};
use crate::dynamics::{phi_a, phi_b, reference_solve, reference_solve_observed, ModelParams, SubstepPolicy};
use crate::error::Result;
use crate::harness::config::{ExperimentConfig, SchemeChoice, SubstepConfig};
use crate::harness::experiment::{errors_csv, run_in_memory, ExperimentReport};
use crate::harness::ic::{build_ic, InitialCondition, RandomBand};
use crate::spectral::{fractional_laplacian, gradient, sobolev_norm, Grid, SpectralField};
use crate::splitting::{evolve, SchemeKind};

#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub measured: f64,
    pub threshold: String,
    pub passed: bool,
}

impl CheckResult {
    fn at_most(name: impl Into<String>, measured: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            threshold: format!("<= {limit:e}"),
            passed: measured <= limit,
        }
    }

    fn at_least(name: impl Into<String>, measured: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            threshold: format!(">= {limit}"),
            passed: measured >= limit,
        }
    }

    fn within(name: impl Into<String>, measured: f64, lo: f64, hi: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            threshold: format!("in [{lo}, {hi}]"),
            passed: (lo..=hi).contains(&measured),
        }
    }
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<36} {:>13.6e}  {:<22} {}",
            self.name,
            self.measured,
            self.threshold,
            if self.passed { "PASS" } else { "FAIL" }
        )
    }
}

#[derive(Clone, Copy, Debug)]
pub struct VerifyOptions {
    pub grid_n: usize,
    /// Flip the sign of the `Λ^α` multiplier inside the identity checks.
    pub tamper_multiplier: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            grid_n: 128,
            tamper_multiplier: false,
        }
    }
}

/// Step sizes of the convergence experiment.
pub const ACCEPTANCE_DTS: [f64; 4] = [0.1, 0.05, 0.025, 0.0125];
pub const ACCEPTANCE_T: f64 = 0.5;

/// The convergence experiment on `classic_shear` for one `(α, β)`.
pub fn acceptance_config(alpha: f64, beta: f64, grid_n: usize) -> ExperimentConfig {
    ExperimentConfig {
        grid_n,
        alpha,
        beta,
        scheme: SchemeChoice::Both,
        t_final: ACCEPTANCE_T,
        dt_list: ACCEPTANCE_DTS.to_vec(),
        ic: InitialCondition::ClassicShear,
        norm_orders: vec![0.0, 1.0, 3.0],
        substep: SubstepConfig::default(),
        output_dir: "out".into(),
        snapshot_times: Vec::new(),
        max_dt: None,
    }
}

fn lambda(tamper: bool, alpha: f64) -> impl Fn(&SpectralField) -> Result<SpectralField> {
    move |f| {
        let out = fractional_laplacian(f, alpha)?;
        Ok(if tamper { out.scaled(-1.0) } else { out })
    }
}

fn seeded_field(grid: &Grid, seed: u64) -> Result<SpectralField> {
    let band = (grid.n() as i64 / 4).min(6);
    build_ic(
        &InitialCondition::RandomBand(RandomBand {
            seed,
            decay_exponent: 1.0,
            band,
        }),
        grid,
    )
}

/// `Λ² f = -(∂²_x + ∂²_y) f` on seeded band-limited fields.
pub fn laplacian_identity(grid: &Grid, tamper: bool) -> Result<CheckResult> {
    let lap = lambda(tamper, 2.0);
    let mut worst: f64 = 0.0;
    for seed in 0..10 {
        let f = seeded_field(grid, seed)?;
        let (fx, fy) = gradient(&f);
        let neg_laplacian = gradient(&fx).0.add(&gradient(&fy).1)?.scaled(-1.0);
        let spectral = lap(&f)?;
        let rel = sobolev_norm(&spectral.sub(&neg_laplacian)?, 0.0) / sobolev_norm(&neg_laplacian, 0.0);
        worst = worst.max(rel);
    }
    Ok(CheckResult::at_most("laplacian_squared_identity", worst, 1e-12))
}

/// `‖G²(f,g) + 2∇f·∇g‖ ≤ 1e-10 ‖f‖_{H¹}‖g‖_{H¹}` over 20 seeded pairs.
pub fn commutator_identity(grid: &Grid, tamper: bool) -> Result<CheckResult> {
    let mut worst: f64 = 0.0;
    for pair in 0..20u64 {
        let f = seeded_field(grid, 1000 + 2 * pair)?;
        let g = seeded_field(grid, 1001 + 2 * pair)?;
        let commutator = commutator_with(&f, &g, lambda(tamper, 2.0), 2.0)?;
        let (fx, fy) = gradient(&f);
        let (gx, gy) = gradient(&g);
        let dot = fx.dealiased_product(&gx)?.add(&fy.dealiased_product(&gy)?)?;
        let residual = sobolev_norm(&commutator.add_scaled(2.0, &dot)?, 0.0);
        worst = worst.max(residual / (sobolev_norm(&f, 1.0) * sobolev_norm(&g, 1.0)));
    }
    Ok(CheckResult::at_most("commutator_alpha2_identity", worst, 1e-10))
}

/// `Φ_A` against `e^{-t|k|^α}` on modes (1,0) and (2,1).
pub fn diffusion_exactness(grid: &Grid) -> Result<CheckResult> {
    let mut worst: f64 = 0.0;
    for alpha in [0.5, 1.0, 1.5, 2.0] {
        let p = ModelParams::new(alpha, 1.0)?;
        for (k1, k2) in [(1i64, 0i64), (2, 1)] {
            let one = rustfft::num_complex::Complex64::new(0.5, 0.0);
            let mode = SpectralField::from_modes(grid, &[((k1, k2), one), ((-k1, -k2), one)])?;
            for t in [0.1, 1.0] {
                let out = phi_a(t, &mode, &p)?;
                let magnitude = ((k1 * k1 + k2 * k2) as f64).sqrt();
                let expected = 0.5 * (-t * magnitude.powf(alpha)).exp();
                let got = out.coeff(k1, k2);
                worst = worst.max((got.re - expected).abs() / expected).max(got.im.abs() / expected);
            }
        }
    }
    Ok(CheckResult::at_most("diffusion_flow_exact", worst, 1e-12))
}

/// `Φ_B` over unit time on `classic_shear`: L² drift and mean.
pub fn transport_conservation(grid: &Grid) -> Result<[CheckResult; 2]> {
    let p = ModelParams::new(1.0, 1.0)?;
    let theta = build_ic(&InitialCondition::ClassicShear, grid)?;
    let out = phi_b(1.0, &theta, &p, &SubstepPolicy::for_step(1.0))?;
    let l2_0 = sobolev_norm(&theta, 0.0);
    let drift = (sobolev_norm(&out, 0.0) - l2_0).abs() / l2_0;
    Ok([
        CheckResult::at_most("transport_l2_drift", drift, 1e-8),
        CheckResult::at_most("transport_mean", out.relative_mean(), 1e-12),
    ])
}

/// Both schemes on `cos x` reproduce `e^{-1} cos x`.
pub fn steady_closed_form(grid: &Grid) -> Result<CheckResult> {
    let theta = build_ic(&InitialCondition::SteadyMode, grid)?;
    let exact = theta.scaled((-1.0f64).exp());
    let mut worst: f64 = 0.0;
    for alpha in [1.0, 1.5, 2.0] {
        let p = ModelParams::new(alpha, 1.0)?;
        for scheme in SchemeKind::ALL {
            let traj = evolve(scheme, &theta, 1.0, 0.1, &p, &SubstepPolicy::for_step(0.1), &[])?;
            worst = worst.max(sobolev_norm(&traj.final_state().sub(&exact)?, 0.0));
        }
    }
    Ok(CheckResult::at_most("steady_mode_closed_form", worst, 1e-10))
}

/// Largest step-to-step increase of `‖θ‖_{L²}` along the reference solution.
pub fn dissipation_monotone(grid: &Grid) -> Result<CheckResult> {
    let p = ModelParams::new(1.0, 1.0)?;
    let theta = build_ic(&InitialCondition::ClassicShear, grid)?;
    let dt_ref = ACCEPTANCE_DTS[3] / 16.0;
    let mut previous = f64::INFINITY;
    let mut worst_increase = f64::NEG_INFINITY;
    reference_solve_observed(ACCEPTANCE_T, &theta, &p, dt_ref, |_, state| {
        let l2 = sobolev_norm(state, 0.0);
        if previous.is_finite() {
            worst_increase = worst_increase.max(l2 - previous);
        }
        previous = l2;
    })?;
    Ok(CheckResult::at_most("reference_l2_nonincreasing", worst_increase, 1e-10))
}

/// Steps used by the Richardson check of the reference integrator.
pub const RICHARDSON_STEPS: [f64; 3] = [1.0 / 40.0, 1.0 / 80.0, 1.0 / 160.0];

/// `‖R(h) - R(h/2)‖ / ‖R(h/2) - R(h/4)‖` for the integrating-factor RK4.
pub fn reference_order_ratio(grid: &Grid) -> Result<f64> {
    let p = ModelParams::new(1.0, 1.0)?;
    let theta = build_ic(&InitialCondition::ClassicShear, grid)?;
    let solutions = RICHARDSON_STEPS
        .iter()
        .map(|&h| reference_solve(ACCEPTANCE_T, &theta, &p, h))
        .collect::<Result<Vec<_>>>()?;
    let d1 = sobolev_norm(&solutions[0].sub(&solutions[1])?, 0.0);
    let d2 = sobolev_norm(&solutions[1].sub(&solutions[2])?, 0.0);
    Ok(d1 / d2)
}

fn l2_fit(report: &ExperimentReport, scheme: SchemeKind) -> (f64, f64) {
    report
        .reports
        .iter()
        .find(|r| r.scheme == scheme)
        .and_then(|r| r.fit_at(0.0))
        .map(|f| match &f.outcome {
            FitOutcome::Fitted { slope, r_squared } => (*slope, *r_squared),
            FitOutcome::Degenerate { .. } => (f64::NAN, f64::NAN),
        })
        .unwrap_or((f64::NAN, f64::NAN))
}

fn l2_error_at(report: &ExperimentReport, scheme: SchemeKind, dt: f64) -> f64 {
    report
        .reports
        .iter()
        .find(|r| r.scheme == scheme)
        .and_then(|r| r.samples.iter().find(|s| s.dt == dt))
        .and_then(|s| s.error_at(0.0))
        .unwrap_or(f64::NAN)
}

/// Order checks for one `(α, β)` from a finished experiment.
pub fn order_checks(report: &ExperimentReport, alpha: f64, beta: f64) -> Vec<CheckResult> {
    let tag = format!("a{alpha}_b{beta}");
    let (g_slope, g_r2) = l2_fit(report, SchemeKind::Godunov);
    let (s_slope, s_r2) = l2_fit(report, SchemeKind::Strang);
    let finest = ACCEPTANCE_DTS[3];
    let gain = l2_error_at(report, SchemeKind::Godunov, finest) / l2_error_at(report, SchemeKind::Strang, finest);
    vec![
        CheckResult::within(format!("godunov_l2_slope_{tag}"), g_slope, 0.85, 1.15),
        CheckResult::at_least(format!("godunov_l2_r2_{tag}"), g_r2, 0.99),
        CheckResult::within(format!("strang_l2_slope_{tag}"), s_slope, 1.8, 2.2),
        CheckResult::at_least(format!("strang_l2_r2_{tag}"), s_r2, 0.99),
        CheckResult::at_least(format!("strang_gain_at_finest_{tag}"), gain, 5.0),
    ]
}

/// Runs every acceptance check.
pub fn verify_suite(opts: &VerifyOptions) -> Result<Vec<CheckResult>> {
    let grid = Grid::new(opts.grid_n)?;
    let mut checks = Vec::new();

    let mut first_csv = None;
    for (alpha, beta) in [(1.0, 1.0), (2.0, 2.0)] {
        let report = run_in_memory(&acceptance_config(alpha, beta, opts.grid_n))?;
        checks.extend(order_checks(&report, alpha, beta));
        if first_csv.is_none() {
            first_csv = Some(errors_csv(&report));
        }
    }
    checks.push(diffusion_exactness(&grid)?);
    checks.extend(transport_conservation(&grid)?);
    checks.push(commutator_identity(&grid, opts.tamper_multiplier)?);
    checks.push(laplacian_identity(&grid, opts.tamper_multiplier)?);
    checks.push(steady_closed_form(&grid)?);
    checks.push(dissipation_monotone(&grid)?);
    checks.push(CheckResult::within(
        "reference_richardson_ratio",
        reference_order_ratio(&grid)?,
        12.0,
        20.0,
    ));
    let rerun = errors_csv(&run_in_memory(&acceptance_config(1.0, 1.0, opts.grid_n))?);
    let identical = first_csv.as_deref() == Some(rerun.as_str());
    checks.push(CheckResult {
        name: "errors_csv_deterministic".into(),
        measured: if identical { 0.0 } else { 1.0 },
        threshold: "byte-identical".into(),
        passed: identical,
    });
    Ok(checks)
}
