//! JSON experiment configuration.
//!
//! ```json
//! {
//!   "grid_n": 128,                 // even, >= 8             (default 128)
//!   "alpha": 1.0,                  // (0, 2]
//!   "beta": 1.0,                   // [1, 2]
//!   "scheme": "both",              // godunov | strang | both (default both)
//!   "T": 0.5,                      // > 0
//!   "dt_list": [0.1, 0.05, 0.025], // >= 3 distinct steps, each dividing T
//!   "ic": "classic_shear",         // preset name or {"seed", "decay_exponent", "band"}
//!   "norm_orders": [0, 1, 3],      // each in [-4, 12]       (default [0, 1, 3])
//!   "substep": {"cfl_fraction": 0.5, "max_substep": null},  // null: dt/8 per run
//!   "output_dir": "out",           //                        (default "out")
//!   "snapshot_times": [],          // multiples of every dt  (default none)
//!   "max_dt": null                 // small-step warning threshold (default per preset)
//! }
//! ```
//!
//! Unknown and duplicate keys are rejected.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::analysis::study_steps;
use crate::dynamics::{ModelParams, SubstepPolicy, SubstepRule};
use crate::error::{Error, Result};
use crate::harness::ic::InitialCondition;
use crate::spectral::Grid;
use crate::splitting::{divides, SchemeKind};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeChoice {
    Godunov,
    Strang,
    #[default]
    Both,
}

impl SchemeChoice {
    pub fn schemes(self) -> Vec<SchemeKind> {
        match self {
            SchemeChoice::Godunov => vec![SchemeKind::Godunov],
            SchemeChoice::Strang => vec![SchemeKind::Strang],
            SchemeChoice::Both => SchemeKind::ALL.to_vec(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubstepConfig {
    #[serde(default = "default_cfl")]
    pub cfl_fraction: f64,
    #[serde(default)]
    pub max_substep: Option<f64>,
}

impl Default for SubstepConfig {
    fn default() -> Self {
        Self {
            cfl_fraction: default_cfl(),
            max_substep: None,
        }
    }
}

fn default_cfl() -> f64 {
    SubstepPolicy::DEFAULT_CFL
}

fn default_grid() -> usize {
    128
}

fn default_norms() -> Vec<f64> {
    vec![0.0, 1.0, 3.0]
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

/// A validated experiment configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_grid")]
    pub grid_n: usize,
    pub alpha: f64,
    pub beta: f64,
    #[serde(default)]
    pub scheme: SchemeChoice,
    #[serde(rename = "T")]
    pub t_final: f64,
    pub dt_list: Vec<f64>,
    pub ic: InitialCondition,
    #[serde(default = "default_norms")]
    pub norm_orders: Vec<f64>,
    #[serde(default)]
    pub substep: SubstepConfig,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
    #[serde(default)]
    pub max_dt: Option<f64>,
}

impl ExperimentConfig {
    pub fn params(&self) -> ModelParams {
        ModelParams {
            alpha: self.alpha,
            beta: self.beta,
        }
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.grid_n)
    }

    pub fn substep_rule(&self) -> SubstepRule {
        match self.substep.max_substep {
            Some(max_substep) => SubstepRule::Fixed(SubstepPolicy {
                max_substep,
                cfl_fraction: self.substep.cfl_fraction,
            }),
            None => SubstepRule::PerStep {
                cfl_fraction: self.substep.cfl_fraction,
            },
        }
    }

    pub fn max_dt(&self) -> f64 {
        self.max_dt.unwrap_or_else(|| self.ic.max_dt())
    }

    /// Checks every field against the preconditions of the operations it feeds.
    pub fn validate(&self) -> Result<()> {
        if let Err(e) = Grid::new(self.grid_n) {
            return Err(Error::Validation(format!("grid_n: {e}")));
        }
        ModelParams::new(self.alpha, self.beta)?;
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(Error::Validation(format!("T > 0 required, got {}", self.t_final)));
        }
        study_steps(self.t_final, &self.dt_list)
            .map_err(|e| Error::Validation(format!("dt_list: {e}")))?;
        if self.norm_orders.is_empty() {
            return Err(Error::Validation("norm_orders must not be empty".into()));
        }
        for (i, &s) in self.norm_orders.iter().enumerate() {
            if !(-4.0..=12.0).contains(&s) {
                return Err(Error::Validation(format!("norm order s ∈ [-4, 12] required, got {s}")));
            }
            if self.norm_orders[..i].contains(&s) {
                return Err(Error::Validation(format!("norm order {s} listed twice")));
            }
        }
        let policy_check = SubstepPolicy::new(
            self.substep.max_substep.unwrap_or(1.0),
            self.substep.cfl_fraction,
        );
        policy_check.map_err(|e| Error::Validation(format!("substep: {e}")))?;
        let limit = self.grid_n as i64 / 4;
        if self.ic.band() > limit {
            return Err(Error::Band {
                band: self.ic.band(),
                limit,
            });
        }
        if let InitialCondition::RandomBand(r) = &self.ic {
            if r.band < 1 || !r.decay_exponent.is_finite() {
                return Err(Error::Validation(
                    "random_band needs band >= 1 and a finite decay_exponent".into(),
                ));
            }
        }
        for &ts in &self.snapshot_times {
            if !(0.0..=self.t_final).contains(&ts) {
                return Err(Error::Validation(format!("snapshot time {ts} outside [0, T]")));
            }
            if let Some(dt) = self.dt_list.iter().find(|&&dt| !divides(ts, dt)) {
                return Err(Error::Validation(format!(
                    "snapshot time {ts} is not on the step lattice of dt = {dt}"
                )));
            }
        }
        if let Some(max_dt) = self.max_dt {
            if !(max_dt > 0.0) {
                return Err(Error::Validation(format!("max_dt > 0 required, got {max_dt}")));
            }
        }
        Ok(())
    }
}

/// Parses and validates a JSON configuration document.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let config: ExperimentConfig =
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    config.validate()?;
    Ok(config)
}
