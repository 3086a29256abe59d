//! Initial fields `v0, v1, p0, p1` and the initial history `g0`.

use std::f64::consts::PI;

use evalexpr::{
    build_operator_tree, ContextWithMutableVariables, DefaultNumericTypes, HashMapContext, Node,
    Value,
};
use serde::{Deserialize, Serialize};

use super::ScenarioError;
use crate::params::DelayProfile;
use crate::solver::{init_history, Grid, HistoryBuffer, SimState};

/// Named presets or closed-form expressions.
///
/// Expressions see the variables `x`, `L`, `pi` and, for `g0`, `s <= 0`, and
/// use evalexpr syntax (`math::sin(pi * x / (2.0 * L))`). Integer literals
/// stay integers, so `1/2` is `0`; write `1.0/2.0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialConfig {
    Zero,
    /// `v0 = A sin(πx / 2L)`, everything else zero.
    FundamentalMode { amplitude: f64 },
    /// `v0 = A min(x / peak, 1)`, everything else zero.
    Pluck { amplitude: f64, peak_m: f64 },
    /// `g0` defaults to the constant extension of `v1`.
    Expressions {
        v0: String,
        v1: String,
        p0: String,
        p1: String,
        g0: Option<String>,
    },
}

struct Expr {
    field: &'static str,
    source: String,
    node: Node<DefaultNumericTypes>,
}

impl Expr {
    fn compile(field: &'static str, source: &str) -> Result<Self, ScenarioError> {
        let node = build_operator_tree::<DefaultNumericTypes>(source).map_err(|e| {
            ScenarioError::Expression {
                field,
                message: format!("{source:?}: {e}"),
            }
        })?;
        Ok(Self {
            field,
            source: source.to_string(),
            node,
        })
    }

    fn eval(&self, ctx: &mut HashMapContext, x: f64, s: f64) -> Result<f64, ScenarioError> {
        let err = |message: String| ScenarioError::Expression {
            field: self.field,
            message,
        };
        for (name, value) in [("x", x), ("s", s)] {
            ctx.set_value(name.into(), Value::Float(value))
                .map_err(|e| err(e.to_string()))?;
        }
        let value = self
            .node
            .eval_number_with_context(ctx)
            .map_err(|e| err(format!("{:?} at x = {x}, s = {s}: {e}", self.source)))?;
        if !value.is_finite() {
            return Err(err(format!("{:?} is not finite at x = {x}, s = {s}", self.source)));
        }
        Ok(value)
    }
}

fn context(length: f64) -> Result<HashMapContext, ScenarioError> {
    let mut ctx = HashMapContext::<DefaultNumericTypes>::new();
    for (name, value) in [("L", length), ("pi", PI), ("x", 0.0), ("s", 0.0)] {
        ctx.set_value(name.into(), Value::Float(value))
            .map_err(|e| ScenarioError::Expression {
                field: "context",
                message: e.to_string(),
            })?;
    }
    Ok(ctx)
}

impl InitialConfig {
    pub fn validate(&self, length: f64) -> Result<(), ScenarioError> {
        let invalid = |field: &str, reason: &str| ScenarioError::Invalid {
            field: format!("initial.{field}"),
            reason: reason.into(),
        };
        match self {
            InitialConfig::Zero => Ok(()),
            InitialConfig::FundamentalMode { amplitude } => {
                if amplitude.is_finite() {
                    Ok(())
                } else {
                    Err(invalid("amplitude", "must be finite"))
                }
            }
            InitialConfig::Pluck { amplitude, peak_m } => {
                if !amplitude.is_finite() {
                    return Err(invalid("amplitude", "must be finite"));
                }
                if !(*peak_m > 0.0 && *peak_m <= length) {
                    return Err(invalid("peak_m", "must lie in (0, L]"));
                }
                Ok(())
            }
            InitialConfig::Expressions { .. } => {
                // Evaluate once at both ends so typos surface at load time.
                let grid = Grid::new(3, length).map_err(|e| invalid("grid", &e.to_string()))?;
                self.state(&grid)?;
                Ok(())
            }
        }
    }

    /// The fields at `t = 0` on `grid`.
    pub fn state(&self, grid: &Grid) -> Result<SimState, ScenarioError> {
        let mut state = SimState::zeros(grid.n);
        let nodes = grid.nodes();
        let length = grid.length;
        match self {
            InitialConfig::Zero => {}
            InitialConfig::FundamentalMode { amplitude } => {
                for (v, x) in state.v.iter_mut().zip(&nodes) {
                    *v = amplitude * (PI * x / (2.0 * length)).sin();
                }
            }
            InitialConfig::Pluck { amplitude, peak_m } => {
                for (v, x) in state.v.iter_mut().zip(&nodes) {
                    *v = amplitude * (x / peak_m).min(1.0);
                }
            }
            InitialConfig::Expressions { v0, v1, p0, p1, .. } => {
                let mut ctx = context(length)?;
                let exprs = [
                    Expr::compile("v0", v0)?,
                    Expr::compile("v1", v1)?,
                    Expr::compile("p0", p0)?,
                    Expr::compile("p1", p1)?,
                ];
                let SimState { v, vt, p, pt, .. } = &mut state;
                for (expr, field) in exprs.iter().zip([v, vt, p, pt]) {
                    for (out, &x) in field.iter_mut().zip(&nodes) {
                        *out = expr.eval(&mut ctx, x, 0.0)?;
                    }
                }
            }
        }
        Ok(state)
    }

    /// History buffer for `s <= 0` sampled at the run's `dt`.
    pub fn history(
        &self,
        grid: &Grid,
        delay: &DelayProfile,
        dt: f64,
    ) -> Result<HistoryBuffer, ScenarioError> {
        let g0 = match self {
            InitialConfig::Expressions { g0: Some(g0), .. } => Some(Expr::compile("g0", g0)?),
            InitialConfig::Expressions { v1, g0: None, .. } => Some(Expr::compile("v1", v1)?),
            // Presets start at rest, so g0 = v1 = 0.
            _ => None,
        };
        let Some(expr) = g0 else {
            return Ok(init_history(grid, delay, |_, _| 0.0, dt)?);
        };
        let mut ctx = context(grid.length)?;
        let mut failure = None;
        let buffer = init_history(
            grid,
            delay,
            |x, s| match expr.eval(&mut ctx, x, s) {
                Ok(v) => v,
                Err(e) => {
                    failure.get_or_insert(e);
                    f64::NAN
                }
            },
            dt,
        );
        if let Some(e) = failure {
            return Err(e);
        }
        Ok(buffer?)
    }
}
