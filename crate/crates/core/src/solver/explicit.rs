//! Velocity-Verlet (central difference) step with averaged damping.

use super::{HistoryBuffer, SimState, SolverError, SpatialOperator};
use crate::params::{DelayProfile, WeightProfiles};

/// One-step mechanical energy growth treated as blow-up.
pub(crate) const BLOWUP_RATIO: f64 = 10.0;

pub(crate) fn guard(t: f64, before: f64, after: f64) -> Result<(), SolverError> {
    if !after.is_finite() || (before > 0.0 && after > BLOWUP_RATIO * before) {
        return Err(SolverError::Divergence { t, before, after });
    }
    Ok(())
}

/// Scratch storage for repeated explicit steps on one grid.
#[derive(Debug, Clone)]
pub struct ExplicitStepper {
    fv: Vec<f64>,
    fp: Vec<f64>,
    fv1: Vec<f64>,
    fp1: Vec<f64>,
    z0: Vec<f64>,
    z1: Vec<f64>,
}

impl ExplicitStepper {
    pub fn new(n: usize) -> Self {
        let z = vec![0.0; n];
        Self {
            fv: z.clone(),
            fp: z.clone(),
            fv1: z.clone(),
            fp1: z.clone(),
            z0: z.clone(),
            z1: z,
        }
    }

    /// Advances `state` by `dt = history.dt()` and pushes the new velocity.
    pub fn step(
        &mut self,
        state: &mut SimState,
        history: &mut HistoryBuffer,
        op: &SpatialOperator,
        weights: &WeightProfiles,
        delay: &DelayProfile,
    ) -> Result<(), SolverError> {
        let dt = history.dt();
        let t0 = history.newest_time();
        let t1 = history.next_time();
        let n = state.len();
        let rho = op.params.rho;
        let before = op.mechanical_energy(state);

        op.apply(&state.v, &state.p, &mut self.fv, &mut self.fp);
        history.sample_into(t0 - delay.tau(t0), &mut self.z0)?;
        history.sample_into(t1 - delay.tau(t1), &mut self.z1)?;
        let d1_0 = weights.delta1(t0);
        let d2_0 = weights.delta2(t0);
        let d2_1 = weights.delta2(t1);
        let d1_half = weights.delta1(t0 + 0.5 * dt);

        let half_dt2 = 0.5 * dt * dt;
        for i in 1..n {
            let damping = (d1_0 * state.vt[i] + d2_0 * self.z0[i]) / rho;
            state.v[i] += dt * state.vt[i] + half_dt2 * (self.fv[i] - damping);
            state.p[i] += dt * state.pt[i] + half_dt2 * self.fp[i];
        }
        op.apply(&state.v, &state.p, &mut self.fv1, &mut self.fp1);

        let h = 0.5 * dt * d1_half / rho;
        for i in 1..n {
            let delayed = 0.5 * (d2_0 * self.z0[i] + d2_1 * self.z1[i]);
            state.vt[i] = (state.vt[i] * (1.0 - h) + 0.5 * dt * (self.fv[i] + self.fv1[i])
                - dt * delayed / rho)
                / (1.0 + h);
            state.pt[i] += 0.5 * dt * (self.fp[i] + self.fp1[i]);
        }
        state.v[0] = 0.0;
        state.p[0] = 0.0;
        state.vt[0] = 0.0;
        state.pt[0] = 0.0;
        state.t = t1;
        history.push(&state.vt);

        guard(t1, before, op.mechanical_energy(state))
    }
}

/// Single explicit step from `state`; see [`ExplicitStepper`] for repeated use.
pub fn step_explicit(
    state: &SimState,
    history: &mut HistoryBuffer,
    op: &SpatialOperator,
    weights: &WeightProfiles,
    delay: &DelayProfile,
) -> Result<SimState, SolverError> {
    let mut next = state.clone();
    ExplicitStepper::new(state.len()).step(&mut next, history, op, weights, delay)?;
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{BeamParams, DampingShape, DelayGainShape};
    use crate::solver::{build_operator, cfl_timestep, init_history, Grid};
    use std::f64::consts::PI;

    fn weights(d1: f64, d2: f64) -> WeightProfiles {
        WeightProfiles::new(
            DampingShape::Constant { value: d1 },
            DelayGainShape::Constant { value: d2 },
        )
    }

    #[test]
    fn zero_state_stays_zero() {
        let params = BeamParams::new(1.0, 2.0, 0.5, 1.0, 1.0, 1.0).unwrap();
        let grid = Grid::new(21, 1.0).unwrap();
        let op = build_operator(&params, &grid).unwrap();
        let delay = DelayProfile::constant(0.3);
        let dt = cfl_timestep(&params, &grid, &delay, 0.5).unwrap();
        let mut h = init_history(&grid, &delay, |_, _| 0.0, dt).unwrap();
        let mut state = SimState::zeros(21);
        let w = weights(1.0, 0.3);
        for _ in 0..200 {
            state = step_explicit(&state, &mut h, &op, &w, &delay).unwrap();
        }
        assert_eq!(state.sup_norm(), 0.0);
    }

    #[test]
    fn standing_wave_period() {
        // gamma = 0, alpha = rho, beta = mu: unit-speed wave. The fundamental
        // clamped-free mode sin(pi x / 2L) has period 4L; after whole periods
        // the profile returns to its initial shape.
        let params = BeamParams::new(1.0, 1.0, 0.0, 1.0, 1.0, 1.0).unwrap();
        let grid = Grid::new(101, 1.0).unwrap();
        let op = build_operator(&params, &grid).unwrap();
        let delay = DelayProfile::constant(1.0);
        let period = 4.0;
        let steps_per_period = 1000;
        let dt = period / steps_per_period as f64;
        let mut h = init_history(&grid, &delay, |_, _| 0.0, dt).unwrap();
        let mode: Vec<f64> = grid.nodes().iter().map(|x| (PI * x / 2.0).sin()).collect();
        let mut state = SimState::zeros(101);
        state.v.clone_from(&mode);
        let mut stepper = ExplicitStepper::new(101);
        let w = weights(0.0, 0.0);
        for _ in 0..10 * steps_per_period {
            stepper.step(&mut state, &mut h, &op, &w, &delay).unwrap();
        }
        let err = state
            .v
            .iter()
            .zip(&mode)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err < 0.01, "max deviation after 10 periods {err}");
    }

    #[test]
    fn damping_decreases_energy_every_step() {
        let params = BeamParams::new(1.0, 2.0, 0.5, 1.0, 1.0, 1.0).unwrap();
        let grid = Grid::new(51, 1.0).unwrap();
        let op = build_operator(&params, &grid).unwrap();
        let delay = DelayProfile::constant(0.5);
        let dt = cfl_timestep(&params, &grid, &delay, 0.5).unwrap();
        let mut h = init_history(&grid, &delay, |_, _| 0.0, dt).unwrap();
        let mut state = SimState::zeros(51);
        state.v = grid.nodes().iter().map(|x| (PI * x / 2.0).sin()).collect();
        let mut stepper = ExplicitStepper::new(51);
        let w = weights(2.0, 0.0);
        let mut prev = op.mechanical_energy(&state);
        let e0 = prev;
        for _ in 0..2000 {
            stepper.step(&mut state, &mut h, &op, &w, &delay).unwrap();
            let e = op.mechanical_energy(&state);
            assert!(e <= prev + 10.0 * (dt * dt + grid.dx * grid.dx) * e0.max(1.0) * dt);
            prev = e;
        }
        assert!(prev < 0.5 * e0);
    }

    #[test]
    fn blow_up_is_reported() {
        let params = BeamParams::new(1.0, 2.0, 0.5, 1.0, 1.0, 1.0).unwrap();
        let grid = Grid::new(51, 1.0).unwrap();
        let op = build_operator(&params, &grid).unwrap();
        let delay = DelayProfile::constant(1.0);
        let dt = 5.0 * grid.dx;
        let mut h = init_history(&grid, &delay, |_, _| 0.0, dt).unwrap();
        let mut state = SimState::zeros(51);
        state.v = grid.nodes().iter().map(|x| x * (1.0 - x) * (7.0 * x).sin()).collect();
        let mut stepper = ExplicitStepper::new(51);
        let w = weights(0.0, 0.0);
        let err = (0..1000)
            .find_map(|_| stepper.step(&mut state, &mut h, &op, &w, &delay).err())
            .expect("must diverge");
        assert!(matches!(err, SolverError::Divergence { .. }));
    }
}
