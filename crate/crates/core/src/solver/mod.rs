//! Method-of-lines discretization and time integration.

mod banded;
mod explicit;
mod history;
mod implicit;
mod operator;
mod run;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::params::ParamsError;

pub use banded::{BandedCholesky, BandedSpd};
pub use explicit::{step_explicit, ExplicitStepper};
pub use history::{init_history, HistoryBuffer};
pub use implicit::{step_implicit, ImplicitStepper};
pub use operator::{build_operator, cfl_timestep, SpatialOperator};
pub use run::{run, FieldSnapshot, RunFailure, RunSpec, Sample, Trajectory};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("grid needs at least 3 nodes, got {0}")]
    Grid(usize),
    #[error("invalid {name} = {value}: {reason}")]
    Config {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("history underrun: t = {query} precedes the oldest snapshot at {oldest}")]
    Underrun { query: f64, oldest: f64 },
    #[error("history overrun: t = {query} is after the newest snapshot at {newest}")]
    Overrun { query: f64, newest: f64 },
    #[error("{what} is not finite at t = {t}")]
    NonFinite { what: &'static str, t: f64 },
    #[error("diverged at t = {t}: mechanical energy {before:e} -> {after:e}")]
    Divergence { t: f64, before: f64, after: f64 },
    #[error("implicit system is not positive definite (pivot {pivot:e} at row {row})")]
    Singular { row: usize, pivot: f64 },
    #[error(transparent)]
    Params(#[from] ParamsError),
}

impl SolverError {
    pub(crate) fn config(name: &'static str, value: f64, reason: &'static str) -> Self {
        SolverError::Config {
            name,
            value,
            reason,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Integrator {
    #[default]
    Explicit,
    Implicit,
}

/// Uniform nodes `x_i = i * dx` on `[0, L]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub n: usize,
    pub dx: f64,
    pub length: f64,
}

impl Grid {
    pub fn new(n: usize, length: f64) -> Result<Self, SolverError> {
        if n < 3 {
            return Err(SolverError::Grid(n));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(SolverError::config("length", length, "must be finite and > 0"));
        }
        Ok(Self {
            n,
            dx: length / (n - 1) as f64,
            length,
        })
    }

    pub fn x(&self, i: usize) -> f64 {
        if i + 1 == self.n {
            self.length
        } else {
            i as f64 * self.dx
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    /// Trapezoidal `∫ a b dx`.
    pub fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        let n = self.n;
        let interior: f64 = (1..n - 1).map(|i| a[i] * b[i]).sum();
        self.dx * (interior + 0.5 * (a[0] * b[0] + a[n - 1] * b[n - 1]))
    }

    pub fn norm2(&self, a: &[f64]) -> f64 {
        self.inner(a, a)
    }

    /// `∫ a_x b_x dx` with cell-wise constant gradients.
    pub fn gradient_inner(&self, a: &[f64], b: &[f64]) -> f64 {
        let s: f64 = a
            .windows(2)
            .zip(b.windows(2))
            .map(|(u, w)| (u[1] - u[0]) * (w[1] - w[0]))
            .sum();
        s / self.dx
    }

    /// Second-order one-sided estimate of `u_x(L)`.
    pub fn right_slope(&self, u: &[f64]) -> f64 {
        let n = self.n;
        (3.0 * u[n - 1] - 4.0 * u[n - 2] + u[n - 3]) / (2.0 * self.dx)
    }
}

/// Fields on the grid at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub t: f64,
    pub v: Vec<f64>,
    pub vt: Vec<f64>,
    pub p: Vec<f64>,
    pub pt: Vec<f64>,
}

impl SimState {
    pub fn zeros(n: usize) -> Self {
        Self {
            t: 0.0,
            v: vec![0.0; n],
            vt: vec![0.0; n],
            p: vec![0.0; n],
            pt: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.v.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v.is_empty()
    }

    pub fn sup_norm(&self) -> f64 {
        [&self.v, &self.vt, &self.p, &self.pt]
            .iter()
            .flat_map(|f| f.iter())
            .fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        [&self.v, &self.vt, &self.p, &self.pt]
            .iter()
            .all(|f| f.iter().all(|x| x.is_finite()))
    }

    /// Scales every field by `a`.
    pub fn scaled(&self, a: f64) -> Self {
        let s = |f: &[f64]| f.iter().map(|x| a * x).collect();
        Self {
            t: self.t,
            v: s(&self.v),
            vt: s(&self.vt),
            p: s(&self.p),
            pt: s(&self.pt),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_endpoints() {
        let g = Grid::new(11, 2.0).unwrap();
        assert_eq!(g.x(0), 0.0);
        assert_eq!(g.x(10), 2.0);
        assert!((g.dx - 0.2).abs() < 1e-15);
        assert!(matches!(Grid::new(2, 1.0), Err(SolverError::Grid(2))));
    }

    #[test]
    fn quadrature_second_order() {
        // ∫_0^1 x^2 dx = 1/3 and ∫ (2x)^2 = 4/3 for u = x^2.
        let err = |n: usize| {
            let g = Grid::new(n, 1.0).unwrap();
            let u: Vec<f64> = g.nodes().iter().map(|x| x * x).collect();
            let ones = vec![1.0; n];
            (
                (g.inner(&u, &ones) - 1.0 / 3.0).abs(),
                (g.gradient_inner(&u, &u) - 4.0 / 3.0).abs(),
            )
        };
        let (a1, b1) = err(21);
        let (a2, b2) = err(41);
        assert!(((a1 / a2).log2() - 2.0).abs() < 0.1);
        assert!(((b1 / b2).log2() - 2.0).abs() < 0.1);
    }

    #[test]
    fn right_slope_exact_on_quadratics() {
        let g = Grid::new(9, 1.0).unwrap();
        let u: Vec<f64> = g.nodes().iter().map(|x| 3.0 * x - x * x).collect();
        assert!((g.right_slope(&u) - 1.0).abs() < 1e-12);
    }
}
