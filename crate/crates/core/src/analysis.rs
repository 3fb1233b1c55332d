//! Fractional Leibniz commutator, error norms and convergence-order fits.

use log::warn;
use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{reference_solve, ModelParams, SubstepRule};
use crate::error::{Error, Result};
use crate::spectral::{fractional_laplacian, sobolev_norm, SpectralField};
use crate::splitting::{divides, evolve, SchemeKind};

/// Errors at or below this fraction of the reference norm are treated as
/// round-off, and fits on them are reported as degenerate.
pub const ROUNDOFF_FLOOR: f64 = 1e-11;

/// `G^α(f, g) = Λ^α(fg) - fΛ^α g - gΛ^α f`.
///
/// Products are formed in physical space and dealiased. Both inputs must be
/// band-limited to `max|k_i| ≤ n/4` so that the products are exact. The
/// result is symmetric in `(f, g)` bit for bit.
pub fn commutator_g(f: &SpectralField, g: &SpectralField, alpha: f64) -> Result<SpectralField> {
    commutator_with(f, g, |h| fractional_laplacian(h, alpha), alpha)
}

/// [`commutator_g`] with a caller-supplied `Λ^α`, used by the verification
/// suite to inject a faulty multiplier.
#[doc(hidden)]
pub fn commutator_with(
    f: &SpectralField,
    g: &SpectralField,
    lambda: impl Fn(&SpectralField) -> Result<SpectralField>,
    alpha: f64,
) -> Result<SpectralField> {
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(Error::Domain(format!("alpha ∈ (0,2] required, got {alpha}")));
    }
    f.check_grid(g)?;
    let limit = f.grid().n() as i64 / 4;
    let max_mode = f.max_mode().max(g.max_mode());
    if max_mode > limit {
        return Err(Error::AliasingRisk { max_mode, limit });
    }
    let whole = lambda(&f.dealiased_product(g)?)?;
    let cross = f
        .dealiased_product(&lambda(g)?)?
        .add(&g.dealiased_product(&lambda(f)?)?)?;
    whole.sub(&cross)
}

/// `‖approx - reference‖_{H^s}`.
pub fn error_norm(approx: &SpectralField, reference: &SpectralField, s: f64) -> Result<f64> {
    Ok(sobolev_norm(&approx.sub(reference)?, s))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NormError {
    pub norm_order: f64,
    pub error: f64,
}

/// Errors of one run, one entry per norm order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErrorSample {
    pub dt: f64,
    pub errors: Vec<NormError>,
}

impl ErrorSample {
    pub fn error_at(&self, s: f64) -> Option<f64> {
        self.errors.iter().find(|e| e.norm_order == s).map(|e| e.error)
    }
}

/// Least-squares fit of `log(error)` against `log(dt)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OrderFit {
    pub slope: f64,
    pub r_squared: f64,
}

/// Fitted order for one norm, or the reason no fit was possible.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum FitOutcome {
    Fitted { slope: f64, r_squared: f64 },
    Degenerate { diagnostic: String },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormFit {
    pub norm_order: f64,
    #[serde(flatten)]
    pub outcome: FitOutcome,
}

impl NormFit {
    pub fn fit(&self) -> Option<OrderFit> {
        match self.outcome {
            FitOutcome::Fitted { slope, r_squared } => Some(OrderFit { slope, r_squared }),
            FitOutcome::Degenerate { .. } => None,
        }
    }
}

/// Fits the convergence order at norm order `s`.
pub fn fit_order(samples: &[ErrorSample], s: f64) -> Result<OrderFit> {
    if samples.len() < 3 {
        return Err(Error::DegenerateFit(format!(
            "need at least 3 samples, got {}",
            samples.len()
        )));
    }
    let mut points = Vec::with_capacity(samples.len());
    for sample in samples {
        let error = sample.error_at(s).ok_or_else(|| {
            Error::DegenerateFit(format!("no error recorded at norm order {s} for dt = {}", sample.dt))
        })?;
        if !(error > 0.0 && error.is_finite()) {
            return Err(Error::DegenerateFit(format!(
                "error {error:e} at dt = {} and norm order {s} is not positive and finite \
                 (machine-epsilon floor reached)",
                sample.dt
            )));
        }
        if !(sample.dt > 0.0) {
            return Err(Error::DegenerateFit(format!("non-positive dt {}", sample.dt)));
        }
        points.push((sample.dt.ln(), error.ln()));
    }
    for (i, a) in points.iter().enumerate() {
        if points[..i].iter().any(|b| b.0 == a.0) {
            return Err(Error::DegenerateFit("repeated dt in samples".into()));
        }
    }

    let m = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / m;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - mean_y).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_res: f64 = points
        .iter()
        .map(|p| (p.1 - (intercept + slope * p.0)).powi(2))
        .sum();
    let r_squared = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    Ok(OrderFit { slope, r_squared })
}

/// Temporal convergence of one splitting scheme against the unsplit reference.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub scheme: SchemeKind,
    pub params: ModelParams,
    pub grid_n: usize,
    pub final_time: f64,
    pub dt_ref: f64,
    /// Sorted by `dt`, largest first.
    pub samples: Vec<ErrorSample>,
    pub fitted_order: Vec<NormFit>,
    pub warnings: Vec<String>,
}

impl ConvergenceReport {
    pub fn fit_at(&self, s: f64) -> Option<&NormFit> {
        self.fitted_order.iter().find(|f| f.norm_order == s)
    }
}

/// Checks the step list of a study and returns it sorted largest first.
pub fn study_steps(t_final: f64, dt_list: &[f64]) -> Result<Vec<f64>> {
    if dt_list.len() < 3 {
        return Err(Error::Configuration(format!(
            "a convergence study needs at least 3 step sizes, got {}",
            dt_list.len()
        )));
    }
    let mut steps = dt_list.to_vec();
    for &dt in &steps {
        if !(dt > 0.0 && dt <= t_final) {
            return Err(Error::Configuration(format!("dt = {dt} must lie in (0, T = {t_final}]")));
        }
        if !divides(t_final, dt) {
            return Err(Error::Configuration(format!(
                "dt = {dt} does not divide T = {t_final}; every step must land on the lattice n·dt = T"
            )));
        }
    }
    steps.sort_by(|a, b| b.total_cmp(a));
    if steps.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Configuration("dt_list contains duplicates".into()));
    }
    Ok(steps)
}

/// Reference step used by [`convergence_study`]: the smallest `dt` over 16.
pub fn reference_step(dt_list: &[f64]) -> f64 {
    dt_list.iter().copied().fold(f64::INFINITY, f64::min) / 16.0
}

/// Runs `scheme` at every `dt` and measures the final-time error against
/// [`reference_solve`] at `min(dt_list) / 16`.
#[allow(clippy::too_many_arguments)]
pub fn convergence_study(
    scheme: SchemeKind,
    theta0: &SpectralField,
    t_final: f64,
    dt_list: &[f64],
    p: &ModelParams,
    rule: &SubstepRule,
    norm_orders: &[f64],
) -> Result<ConvergenceReport> {
    let steps = study_steps(t_final, dt_list)?;
    let dt_ref = reference_step(&steps);
    let reference = reference_solve(t_final, theta0, p, dt_ref)?;
    convergence_study_against(scheme, theta0, &reference, dt_ref, t_final, &steps, p, rule, norm_orders)
}

/// [`convergence_study`] with a precomputed reference solution, so several
/// schemes can share one.
#[allow(clippy::too_many_arguments)]
pub fn convergence_study_against(
    scheme: SchemeKind,
    theta0: &SpectralField,
    reference: &SpectralField,
    dt_ref: f64,
    t_final: f64,
    dt_list: &[f64],
    p: &ModelParams,
    rule: &SubstepRule,
    norm_orders: &[f64],
) -> Result<ConvergenceReport> {
    let steps = study_steps(t_final, dt_list)?;
    let samples = steps
        .par_iter()
        .map(|&dt| -> Result<ErrorSample> {
            let traj = evolve(scheme, theta0, t_final, dt, p, &rule.policy_for(dt), &[])?;
            let errors = norm_orders
                .iter()
                .map(|&s| {
                    Ok(NormError {
                        norm_order: s,
                        error: error_norm(traj.final_state(), reference, s)?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(ErrorSample { dt, errors })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize(scheme, reference, dt_ref, t_final, p, samples, norm_orders))
}

/// Fits every norm order and collects warnings for a finished set of samples.
pub fn summarize(
    scheme: SchemeKind,
    reference: &SpectralField,
    dt_ref: f64,
    t_final: f64,
    p: &ModelParams,
    samples: Vec<ErrorSample>,
    norm_orders: &[f64],
) -> ConvergenceReport {
    let mut warnings = Vec::new();
    let mut fitted_order = Vec::with_capacity(norm_orders.len());
    for &s in norm_orders {
        let errors: Vec<f64> = samples.iter().filter_map(|x| x.error_at(s)).collect();
        if errors.windows(2).any(|w| w[1] >= w[0]) {
            let msg = format!("{scheme}: error at norm order {s} does not decrease monotonically with dt");
            warn!("{msg}");
            warnings.push(msg);
        }
        let floor = ROUNDOFF_FLOOR * sobolev_norm(reference, s);
        let outcome = if errors.iter().all(|&e| e <= floor) {
            FitOutcome::Degenerate {
                diagnostic: format!(
                    "all errors at norm order {s} are at the round-off floor ({floor:.3e}); \
                     the splitting is exact on this datum"
                ),
            }
        } else {
            match fit_order(&samples, s) {
                Ok(fit) => FitOutcome::Fitted {
                    slope: fit.slope,
                    r_squared: fit.r_squared,
                },
                Err(e) => FitOutcome::Degenerate {
                    diagnostic: e.to_string(),
                },
            }
        };
        fitted_order.push(NormFit {
            norm_order: s,
            outcome,
        });
    }
    ConvergenceReport {
        scheme,
        params: *p,
        grid_n: reference.grid().n(),
        final_time: t_final,
        dt_ref,
        samples,
        fitted_order,
        warnings,
    }
}
