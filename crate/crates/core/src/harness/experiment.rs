//! Runs a configured convergence experiment and writes its outputs.
//!
//! Output directory layout:
//!
//! * `report.json`: `{"reports": [ConvergenceReport, ...]}`, one per scheme.
//! * `errors.csv`: header `scheme,dt,norm_order,error`, one row per
//!   (scheme, dt, norm order), numbers with 17 significant digits.
//! * `meta.json`: config echo, versions and wall-clock time.
//! * `snapshots/<scheme>_dt<dt>_t<time>.csv`: physical samples, one row per
//!   `x` index, only when `snapshot_times` is non-empty.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use ndarray::Array2;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::analysis::{error_norm, reference_step, study_steps, summarize, ConvergenceReport, ErrorSample, NormError};
use crate::dynamics::reference_solve;
use crate::error::{Error, Result};
use crate::harness::config::ExperimentConfig;
use crate::harness::ic::build_ic;
use crate::spectral::inverse_transform;
use crate::splitting::{evolve, warn_if_large_step, SchemeKind};

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "GSQG_THREADS";

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentReport {
    pub reports: Vec<ConvergenceReport>,
}

/// Number of workers requested through [`THREADS_ENV`], if set.
pub fn thread_cap() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::Configuration(format!(
                "{THREADS_ENV} must be a positive integer, got {v:?}"
            ))),
        },
        Err(_) => Ok(None),
    }
}

/// Runs `f` on a pool capped by [`THREADS_ENV`].
pub fn with_worker_pool<T: Send>(f: impl FnOnce() -> T + Send) -> Result<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_cap()? {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Configuration(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}

struct RunOutput {
    scheme: SchemeKind,
    sample: ErrorSample,
    snapshots: Vec<(f64, Array2<f64>)>,
}

/// Computes every report of `config` without touching the filesystem.
/// Returns the reports and the requested snapshots.
fn compute(config: &ExperimentConfig) -> Result<(ExperimentReport, Vec<(SchemeKind, f64, f64, Array2<f64>)>)> {
    config.validate()?;
    let grid = config.grid()?;
    let p = config.params();
    let theta0 = build_ic(&config.ic, &grid)?;
    let steps = study_steps(config.t_final, &config.dt_list)?;
    for &dt in &steps {
        warn_if_large_step(dt, config.max_dt());
    }
    let dt_ref = reference_step(&steps);
    let reference = reference_solve(config.t_final, &theta0, &p, dt_ref)?;
    let rule = config.substep_rule();
    let schemes = config.scheme.schemes();

    let jobs: Vec<(SchemeKind, f64)> = schemes
        .iter()
        .flat_map(|&s| steps.iter().map(move |&dt| (s, dt)))
        .collect();
    let outputs = with_worker_pool(|| {
        jobs.par_iter()
            .map(|&(scheme, dt)| -> Result<RunOutput> {
                let traj = evolve(
                    scheme,
                    &theta0,
                    config.t_final,
                    dt,
                    &p,
                    &rule.policy_for(dt),
                    &config.snapshot_times,
                )?;
                let errors = config
                    .norm_orders
                    .iter()
                    .map(|&s| {
                        Ok(NormError {
                            norm_order: s,
                            error: error_norm(traj.final_state(), &reference, s)?,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                let mut snapshots = Vec::new();
                for &ts in &config.snapshot_times {
                    if let Some(i) = traj.times.iter().position(|&t| (t - ts).abs() <= 1e-9 * dt.max(ts)) {
                        snapshots.push((ts, inverse_transform(&traj.states[i])?));
                    }
                }
                Ok(RunOutput {
                    scheme,
                    sample: ErrorSample { dt, errors },
                    snapshots,
                })
            })
            .collect::<Result<Vec<_>>>()
    })??;

    let mut reports = Vec::new();
    let mut snapshots = Vec::new();
    for &scheme in &schemes {
        let samples: Vec<ErrorSample> = outputs
            .iter()
            .filter(|o| o.scheme == scheme)
            .map(|o| o.sample.clone())
            .collect();
        reports.push(summarize(
            scheme,
            &reference,
            dt_ref,
            config.t_final,
            &p,
            samples,
            &config.norm_orders,
        ));
    }
    for o in outputs {
        for (t, s) in o.snapshots {
            snapshots.push((o.scheme, o.sample.dt, t, s));
        }
    }
    Ok((ExperimentReport { reports }, snapshots))
}

/// Runs the experiment and returns its reports without writing files.
pub fn run_in_memory(config: &ExperimentConfig) -> Result<ExperimentReport> {
    Ok(compute(config)?.0)
}

/// `scheme,dt,norm_order,error` rows for every sample of every report.
pub fn errors_csv(report: &ExperimentReport) -> String {
    let mut out = String::from("scheme,dt,norm_order,error\n");
    for r in &report.reports {
        for sample in &r.samples {
            for e in &sample.errors {
                let _ = writeln!(
                    out,
                    "{},{:.16e},{:.16e},{:.16e}",
                    r.scheme, sample.dt, e.norm_order, e.error
                );
            }
        }
    }
    out
}

/// Dense CSV matrix, one row per first-axis index, 17 significant digits.
pub fn matrix_csv(samples: &Array2<f64>) -> String {
    let mut out = String::new();
    for row in samples.rows() {
        let line: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Runs `config` and writes `report.json`, `errors.csv`, `meta.json` and any
/// snapshots into `config.output_dir`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let started = Instant::now();
    let started_unix = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let dir = &config.output_dir;
    fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.display().to_string(),
        source,
    })?;
    // Fail on an unwritable directory before spending time on the run.
    write(&dir.join("meta.json"), "{}\n")?;

    let (report, snapshots) = compute(config)?;

    let report_json = serde_json::to_string_pretty(&report)
        .map_err(|e| Error::Configuration(format!("cannot serialize report: {e}")))?;
    write(&dir.join("report.json"), &(report_json + "\n"))?;
    write(&dir.join("errors.csv"), &errors_csv(&report))?;

    if !snapshots.is_empty() {
        let snap_dir = dir.join("snapshots");
        fs::create_dir_all(&snap_dir).map_err(|source| Error::Io {
            path: snap_dir.display().to_string(),
            source,
        })?;
        for (scheme, dt, t, samples) in &snapshots {
            let name = format!("{scheme}_dt{dt}_t{t}.csv");
            write(&snap_dir.join(name), &matrix_csv(samples))?;
        }
    }

    let meta = json!({
        "config": config,
        "versions": {
            "gsqg": env!("CARGO_PKG_VERSION"),
            "report_format": 1,
        },
        "threads": thread_cap()?.unwrap_or_else(rayon::current_num_threads),
        "started_unix_seconds": started_unix,
        "wall_clock_seconds": started.elapsed().as_secs_f64(),
    });
    let meta_json = serde_json::to_string_pretty(&meta)
        .map_err(|e| Error::Configuration(format!("cannot serialize meta: {e}")))?;
    write(&dir.join("meta.json"), &(meta_json + "\n"))?;
    Ok(report)
}
