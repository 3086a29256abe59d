//! Parameter sweeps: Cartesian grids of scenarios run in parallel.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::scenario::{preset, RunStatus, Scenario, ScenarioError, PRESET_NAMES};

pub const DEFAULT_SWEEP_N: usize = 101;
pub const DEFAULT_SWEEP_HORIZON_S: f64 = 20.0;

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("sweep has no axes")]
    NoAxes,
    #[error("axis {0:?} has no values")]
    EmptyAxis(String),
    #[error("parameter path {0:?} does not resolve in the base scenario")]
    UnresolvedPath(String),
    #[error("sweep point {index} ({assignment}): {source}")]
    Point {
        index: usize,
        assignment: String,
        source: ScenarioError,
    },
    #[error("base scenario {path}: {source}")]
    Base {
        path: PathBuf,
        source: ScenarioError,
    },
    #[error("cannot read base scenario {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("thread pool: {0}")]
    Pool(String),
}

/// A preset name, a path to a scenario file, or an inline scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BaseScenario {
    Named(String),
    Inline(Box<Scenario>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    /// Dotted path into the scenario JSON, e.g. `weights.beta0`.
    pub path: String,
    pub values: Vec<Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub base: BaseScenario,
    pub axes: Vec<Axis>,
    /// Per-run node count; defaults to [`DEFAULT_SWEEP_N`].
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub horizon_s: Option<f64>,
    #[serde(default)]
    pub output_stride: Option<usize>,
    /// Worker threads; `null` lets rayon decide.
    #[serde(default)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepStatus {
    Ok,
    Diverged,
    Infeasible,
}

impl SweepStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepStatus::Ok => "ok",
            SweepStatus::Diverged => "diverged",
            SweepStatus::Infeasible => "infeasible",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub index: usize,
    pub values: Vec<Value>,
    pub valid: bool,
    pub violations: Vec<String>,
    pub h2: Option<f64>,
    pub r_squared: Option<f64>,
    pub energy_ratio: Option<f64>,
    pub status: SweepStatus,
    pub message: Option<String>,
}

impl SweepSpec {
    pub fn from_json(text: &str) -> Result<Self, SweepError> {
        let spec: SweepSpec = serde_json::from_str(text).map_err(|e| SweepError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        if spec.axes.is_empty() {
            return Err(SweepError::NoAxes);
        }
        Ok(spec)
    }

    /// Resolves the base; file paths are relative to `dir`.
    pub fn base_scenario(&self, dir: &Path) -> Result<Scenario, SweepError> {
        match &self.base {
            BaseScenario::Inline(s) => {
                s.validate().map_err(|source| SweepError::Base {
                    path: PathBuf::from("<inline>"),
                    source,
                })?;
                Ok((**s).clone())
            }
            BaseScenario::Named(name) if PRESET_NAMES.contains(&name.as_str()) => {
                Ok(preset(name).expect("listed preset"))
            }
            BaseScenario::Named(file) => {
                let path = dir.join(file);
                let text = std::fs::read_to_string(&path).map_err(|source| SweepError::Io {
                    path: path.clone(),
                    source,
                })?;
                Scenario::from_json(&text).map_err(|source| SweepError::Base { path, source })
            }
        }
    }

    pub fn run_count(&self) -> usize {
        self.axes.iter().map(|a| a.values.len()).product()
    }
}

fn resolve<'a>(root: &'a mut Value, path: &str) -> Option<&'a mut Value> {
    let mut node = root;
    for key in path.split('.') {
        node = match node {
            Value::Object(map) => map.get_mut(key)?,
            Value::Array(items) => items.get_mut(key.parse::<usize>().ok()?)?,
            _ => return None,
        };
    }
    Some(node)
}

fn assignment(spec: &SweepSpec, values: &[Value]) -> String {
    spec.axes
        .iter()
        .zip(values)
        .map(|(a, v)| format!("{}={}", a.path, v))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Cartesian product with the first axis varying slowest. Each scenario
/// also gets the sweep's per-run resolution.
pub fn expand(spec: &SweepSpec, base: &Scenario) -> Result<Vec<(Vec<Value>, Scenario)>, SweepError> {
    if spec.axes.is_empty() {
        return Err(SweepError::NoAxes);
    }
    let mut template = serde_json::to_value(base).expect("scenario serializes");
    for axis in &spec.axes {
        if axis.values.is_empty() {
            return Err(SweepError::EmptyAxis(axis.path.clone()));
        }
        if resolve(&mut template, &axis.path).is_none() {
            return Err(SweepError::UnresolvedPath(axis.path.clone()));
        }
    }
    let numerics = &mut template["numerics"];
    numerics["n"] = spec.n.unwrap_or(DEFAULT_SWEEP_N).into();
    numerics["horizon_s"] = spec.horizon_s.unwrap_or(DEFAULT_SWEEP_HORIZON_S).into();
    if let Some(stride) = spec.output_stride {
        numerics["output_stride"] = stride.into();
    }
    // Sweeps keep no field snapshots beyond the first and last.
    numerics["field_stride"] = usize::MAX.into();

    let total = spec.run_count();
    let mut out = Vec::with_capacity(total);
    for index in 0..total {
        let mut rest = index;
        let mut values = vec![Value::Null; spec.axes.len()];
        for (k, axis) in spec.axes.iter().enumerate().rev() {
            values[k] = axis.values[rest % axis.values.len()].clone();
            rest /= axis.values.len();
        }
        let mut point = template.clone();
        for (axis, value) in spec.axes.iter().zip(&values) {
            *resolve(&mut point, &axis.path).expect("checked above") = value.clone();
        }
        let scenario = serde_json::from_value::<Scenario>(point)
            .map_err(|e| ScenarioError::Invalid {
                field: "sweep point".into(),
                reason: e.to_string(),
            })
            .and_then(|s| s.validate().map(|_| s))
            .map_err(|source| SweepError::Point {
                index,
                assignment: assignment(spec, &values),
                source,
            })?;
        out.push((values, scenario));
    }
    Ok(out)
}

fn run_point(index: usize, values: Vec<Value>, scenario: &Scenario) -> SweepRecord {
    let mut record = SweepRecord {
        index,
        values,
        valid: false,
        violations: Vec::new(),
        h2: None,
        r_squared: None,
        energy_ratio: None,
        status: SweepStatus::Diverged,
        message: None,
    };
    let sim = match scenario.simulate() {
        Ok(sim) => sim,
        Err(e) => {
            record.message = Some(e.to_string());
            return record;
        }
    };
    let summary = &sim.summary;
    record.valid = summary.certificate.valid;
    record.violations = summary
        .certificate
        .violation_ids()
        .into_iter()
        .map(String::from)
        .collect();
    record.h2 = summary.decay_fit.map(|f| f.h2);
    record.r_squared = summary.decay_fit.map(|f| f.r_squared);
    record.energy_ratio = summary.energy_ratio;
    record.message = summary.failure.as_ref().map(|f| f.message.clone());
    record.status = if !record.valid {
        SweepStatus::Infeasible
    } else if summary.status == RunStatus::Diverged {
        SweepStatus::Diverged
    } else {
        SweepStatus::Ok
    };
    record
}

/// Runs every point; failures are recorded, never raised. Records come back
/// in expansion order whatever the thread count.
pub fn execute(
    points: Vec<(Vec<Value>, Scenario)>,
    threads: Option<usize>,
) -> Result<Vec<SweepRecord>, SweepError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| SweepError::Pool(e.to_string()))?;
    Ok(pool.install(|| {
        points
            .into_par_iter()
            .enumerate()
            .map(|(i, (values, s))| run_point(i, values, &s))
            .collect()
    }))
}
