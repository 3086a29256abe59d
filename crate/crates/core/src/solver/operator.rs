use super::{Grid, SimState, SolverError};
use crate::params::{BeamParams, DelayProfile};

/// Coupled second-difference operator
/// `(v, p) -> ((alpha v_xx - gamma beta p_xx)/rho, (beta p_xx - gamma beta v_xx)/mu)`
/// with `u(0) = 0` and a mirrored ghost node `u_n = u_{n-2}` at `x = L`.
///
/// With lumped trapezoidal mass this is exactly `-M^{-1} S` for the
/// cell-gradient stiffness `S`, so it conserves the discrete energy reported
/// by [`SpatialOperator::mechanical_energy`].
#[derive(Debug, Clone)]
pub struct SpatialOperator {
    pub params: BeamParams,
    pub grid: Grid,
    /// Rows (v, p) of the coefficient block, divided by `dx^2`.
    coeffs: [[f64; 2]; 2],
}

pub fn build_operator(params: &BeamParams, grid: &Grid) -> Result<SpatialOperator, SolverError> {
    params.validate()?;
    if grid.n < 3 {
        return Err(SolverError::Grid(grid.n));
    }
    let inv = 1.0 / (grid.dx * grid.dx);
    let m = params.wave_matrix();
    Ok(SpatialOperator {
        params: *params,
        grid: *grid,
        coeffs: [
            [m[0][0] * inv, m[0][1] * inv],
            [m[1][0] * inv, m[1][1] * inv],
        ],
    })
}

impl SpatialOperator {
    pub fn coefficients(&self) -> [[f64; 2]; 2] {
        self.params.wave_matrix()
    }

    /// Writes the elastic accelerations of `(v, p)` into `(av, ap)`.
    pub fn apply(&self, v: &[f64], p: &[f64], av: &mut [f64], ap: &mut [f64]) {
        let n = self.grid.n;
        let [[a, b], [c, d]] = self.coeffs;
        av[0] = 0.0;
        ap[0] = 0.0;
        for i in 1..n - 1 {
            let dv = v[i + 1] - 2.0 * v[i] + v[i - 1];
            let dp = p[i + 1] - 2.0 * p[i] + p[i - 1];
            av[i] = a * dv + b * dp;
            ap[i] = c * dv + d * dp;
        }
        let dv = 2.0 * (v[n - 2] - v[n - 1]);
        let dp = 2.0 * (p[n - 2] - p[n - 1]);
        av[n - 1] = a * dv + b * dp;
        ap[n - 1] = c * dv + d * dp;
    }

    /// Kinetic plus elastic energy, without the delay term.
    pub fn mechanical_energy(&self, state: &SimState) -> f64 {
        let g = &self.grid;
        let pr = &self.params;
        let kinetic = 0.5 * pr.rho * g.norm2(&state.vt) + 0.5 * pr.mu * g.norm2(&state.pt);
        let gb = pr.gamma * pr.beta;
        let potential = 0.5
            * (pr.alpha * g.gradient_inner(&state.v, &state.v)
                - 2.0 * gb * g.gradient_inner(&state.v, &state.p)
                + pr.beta * g.gradient_inner(&state.p, &state.p));
        kinetic + potential
    }
}

/// `min(safety dx / c_max, tau_min / 4)`, where `tau_min` is the smaller of
/// the declared and the attained lower delay bound.
pub fn cfl_timestep(
    params: &BeamParams,
    grid: &Grid,
    delay: &DelayProfile,
    safety: f64,
) -> Result<f64, SolverError> {
    if !(safety > 0.0 && safety <= 1.0) {
        return Err(SolverError::config("cfl_safety", safety, "must lie in (0, 1]"));
    }
    let (natural_min, _, _) = delay.shape.natural_bounds();
    let tau_min = delay.tau0.min(natural_min);
    if !(tau_min.is_finite() && tau_min > 0.0) {
        return Err(SolverError::config("tau0", tau_min, "delay must stay positive"));
    }
    Ok((safety * grid.dx / params.max_wave_speed()).min(tau_min / 4.0))
}
