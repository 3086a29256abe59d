//! JSON scenario schema, presets and the single-run pipeline.

mod initial;
mod presets;
mod summary;

pub use initial::InitialConfig;
pub use presets::{preset, PRESET_NAMES};
pub use summary::{RunStatus, Simulation, Summary, SummaryFailure, MIN_R_SQUARED};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diagnostics::{select_multipliers, MultiplierConstants, Multipliers};
use crate::params::{
    build_certificate, validate_assumptions, AssumptionReport, BeamParams, CertificateOverrides,
    DampingShape, DelayGainShape, DelayProfile, DelayShape, ParamsError, StabilityCertificate,
    WeightProfiles, DEFAULT_SAMPLES,
};
use crate::solver::{
    cfl_timestep, Grid, HistoryBuffer, Integrator, RunSpec, SimState, SolverError,
};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid {field}: {reason}")]
    Invalid { field: String, reason: String },
    #[error("initial data {field}: {message}")]
    Expression { field: &'static str, message: String },
    #[error("unknown preset {0:?}")]
    UnknownPreset(String),
    #[error(transparent)]
    Params(#[from] ParamsError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

fn invalid(field: &str, reason: impl Into<String>) -> ScenarioError {
    ScenarioError::Invalid {
        field: field.to_string(),
        reason: reason.into(),
    }
}

/// Delay shape plus declared bounds; `null` bounds are taken from the shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DelayConfig {
    pub shape: DelayShape,
    pub tau0_s: Option<f64>,
    pub tau_bar_s: Option<f64>,
    pub d: Option<f64>,
}

impl DelayConfig {
    pub fn profile(&self) -> DelayProfile {
        DelayProfile::new(self.shape.clone()).with_declared(self.tau0_s, self.tau_bar_s, self.d)
    }
}

/// Like [`DelayGainShape`], except that a `null` modulation ratio means
/// "use the declared `beta0`".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DelayGainConfig {
    Constant { value: f64 },
    Modulated { ratio: Option<f64>, omega_rad_per_s: f64 },
    Table(crate::params::Table),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightsConfig {
    pub delta1: DampingShape,
    pub delta2: DelayGainConfig,
    pub delta0: Option<f64>,
    pub beta0: Option<f64>,
    pub m1: Option<f64>,
    pub m2: Option<f64>,
}

impl WeightsConfig {
    pub fn profiles(&self) -> Result<WeightProfiles, ScenarioError> {
        let delta2 = match &self.delta2 {
            DelayGainConfig::Constant { value } => DelayGainShape::Constant { value: *value },
            DelayGainConfig::Modulated {
                ratio,
                omega_rad_per_s,
            } => DelayGainShape::Modulated {
                ratio: ratio.or(self.beta0).ok_or_else(|| {
                    invalid("weights.delta2.ratio", "null ratio needs a declared beta0")
                })?,
                omega_rad_per_s: *omega_rad_per_s,
            },
            DelayGainConfig::Table(t) => DelayGainShape::Table(t.clone()),
        };
        Ok(WeightProfiles::new(self.delta1.clone(), delta2)
            .with_declared(self.delta0, self.beta0, self.m1, self.m2))
    }
}

fn default_cfl_safety() -> f64 {
    0.5
}
fn default_output_stride() -> usize {
    1
}
fn default_samples() -> usize {
    DEFAULT_SAMPLES
}
fn default_window() -> f64 {
    crate::diagnostics::DEFAULT_WINDOW_FRACTION
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericsConfig {
    pub n: usize,
    #[serde(default = "default_cfl_safety")]
    pub cfl_safety: f64,
    #[serde(default)]
    pub integrator: Integrator,
    pub horizon_s: f64,
    #[serde(default = "default_output_stride")]
    pub output_stride: usize,
    /// Steps between field snapshots; `null` uses `output_stride`.
    #[serde(default)]
    pub field_stride: Option<usize>,
    /// Upper bound on the step; `null` uses the CFL step.
    #[serde(default)]
    pub dt_s: Option<f64>,
    #[serde(default = "default_samples")]
    pub assumption_samples: usize,
    #[serde(default = "default_window")]
    pub fit_window_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub beam: BeamParams,
    pub delay: DelayConfig,
    pub weights: WeightsConfig,
    pub initial: InitialConfig,
    pub numerics: NumericsConfig,
    #[serde(default)]
    pub certificate: CertificateOverrides,
    #[serde(default)]
    pub multipliers: MultiplierConstants,
}

/// Assumption report and certificate of a scenario.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub assumptions: AssumptionReport,
    pub certificate: StabilityCertificate,
}

impl Scenario {
    /// Parses and validates.
    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        let scenario: Scenario =
            serde_json::from_str(text).map_err(|e| ScenarioError::Parse {
                line: e.line(),
                column: e.column(),
                message: e.to_string(),
            })?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        self.beam.validate()?;
        let num = &self.numerics;
        if num.n < 3 {
            return Err(invalid("numerics.n", "must be >= 3"));
        }
        if !(num.horizon_s > 0.0 && num.horizon_s.is_finite()) {
            return Err(invalid("numerics.horizon_s", "must be positive and finite"));
        }
        if !(num.cfl_safety > 0.0 && num.cfl_safety.is_finite()) {
            return Err(invalid("numerics.cfl_safety", "must be positive and finite"));
        }
        if num.output_stride == 0 {
            return Err(invalid("numerics.output_stride", "must be >= 1"));
        }
        if num.field_stride == Some(0) {
            return Err(invalid("numerics.field_stride", "must be >= 1"));
        }
        if let Some(dt) = num.dt_s {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(invalid("numerics.dt_s", "must be positive and finite"));
            }
        }
        if num.assumption_samples < 2 {
            return Err(invalid("numerics.assumption_samples", "must be >= 2"));
        }
        if !(num.fit_window_fraction > 0.0 && num.fit_window_fraction <= 1.0) {
            return Err(invalid("numerics.fit_window_fraction", "must lie in (0, 1]"));
        }
        self.weights.profiles()?;
        self.initial.validate(self.beam.length)?;
        Ok(())
    }

    pub fn profiles(&self) -> Result<(DelayProfile, WeightProfiles), ScenarioError> {
        Ok((self.delay.profile(), self.weights.profiles()?))
    }

    pub fn check(&self) -> Result<CheckOutcome, ScenarioError> {
        let (delay, weights) = self.profiles()?;
        let assumptions = validate_assumptions(
            &delay,
            &weights,
            self.numerics.horizon_s,
            self.numerics.assumption_samples,
        )?;
        let certificate =
            build_certificate(&self.beam, &delay, &weights, &self.certificate, &assumptions)?;
        Ok(CheckOutcome {
            assumptions,
            certificate,
        })
    }

    /// Multipliers for a valid certificate.
    pub fn multipliers(
        &self,
        certificate: &StabilityCertificate,
    ) -> Result<Multipliers, ScenarioError> {
        let (_, weights) = self.profiles()?;
        select_multipliers(
            &self.beam,
            weights.delta1(0.0),
            weights.beta0,
            certificate,
            &self.multipliers,
        )
        .map_err(|e| invalid("multipliers", e.to_string()))
    }

    /// Step size and count: the CFL (or requested) step shrunk so that an
    /// integer number of steps lands exactly on the horizon.
    pub fn time_grid(&self) -> Result<(Grid, f64, usize), ScenarioError> {
        let grid = Grid::new(self.numerics.n, self.beam.length)?;
        let delay = self.delay.profile();
        let cfl = cfl_timestep(&self.beam, &grid, &delay, self.numerics.cfl_safety)?;
        let target = match self.numerics.dt_s {
            Some(dt) => {
                // The delayed term is read from history, so the step must
                // stay well below the smallest delay.
                let (tau_min, _, _) = delay.shape.natural_bounds();
                let limit = 0.25 * tau_min.min(delay.tau0);
                if dt > limit {
                    return Err(invalid(
                        "numerics.dt_s",
                        format!("{dt} exceeds a quarter of the minimum delay ({limit})"),
                    ));
                }
                dt
            }
            None => cfl,
        };
        let horizon = self.numerics.horizon_s;
        let steps = (horizon / target).ceil().max(1.0) as usize;
        Ok((grid, horizon / steps as f64, steps))
    }

    /// Everything `solver::run` needs.
    pub fn run_inputs(
        &self,
        certificate: &StabilityCertificate,
        multipliers: Option<Multipliers>,
    ) -> Result<(RunSpec, SimState, HistoryBuffer), ScenarioError> {
        let (delay, weights) = self.profiles()?;
        let (grid, dt, steps) = self.time_grid()?;
        let initial = self.initial.state(&grid)?;
        let history = self.initial.history(&grid, &delay, dt)?;
        let spec = RunSpec {
            params: self.beam,
            delay,
            weights,
            certificate: certificate.clone(),
            multipliers,
            grid,
            dt,
            steps,
            integrator: self.numerics.integrator,
            output_stride: self.numerics.output_stride,
            field_stride: Some(self.numerics.field_stride.unwrap_or(self.numerics.output_stride)),
        };
        Ok((spec, initial, history))
    }
}
