//! Backward-Euler step for the stiff wave part.
//!
//! The unknowns are the nodal values on `1..=n-2`, interleaved as
//! `(v_1, p_1, v_2, p_2, ...)`. The last node is eliminated through
//! `u_{n-1} = (4 u_{n-2} - u_{n-3}) / 3`, so the one-sided derivatives at
//! `x = L` vanish exactly. Projecting the lumped-mass system onto that
//! subspace keeps it symmetric positive definite with half-bandwidth 3.

use super::explicit::guard;
use super::{BandedCholesky, BandedSpd, HistoryBuffer, SimState, SolverError, SpatialOperator};
use crate::params::{DelayProfile, WeightProfiles};

const KD: usize = 3;

#[derive(Debug, Clone)]
pub struct ImplicitStepper {
    n: usize,
    matrix: BandedSpd,
    factor: Option<(u64, u64, BandedCholesky)>,
    z: Vec<f64>,
    rhs: Vec<f64>,
    v_hat: Vec<f64>,
    p_hat: Vec<f64>,
}

/// Full node `i` expressed in reduced unknowns: `(node, weight)` pairs.
fn prolong(n: usize, i: usize) -> ([(usize, f64); 2], usize) {
    if i + 1 < n {
        ([(i, 1.0), (0, 0.0)], 1)
    } else if n - 3 >= 1 {
        ([(n - 2, 4.0 / 3.0), (n - 3, -1.0 / 3.0)], 2)
    } else {
        ([(n - 2, 4.0 / 3.0), (0, 0.0)], 1)
    }
}

fn dof(node: usize, field: usize) -> usize {
    2 * (node - 1) + field
}

/// Applies the end constraint to a nodal field.
pub(crate) fn constrain(u: &mut [f64]) {
    let n = u.len();
    u[n - 1] = (4.0 * u[n - 2] - u[n - 3]) / 3.0;
}

impl ImplicitStepper {
    pub fn new(n: usize) -> Self {
        let m = 2 * (n - 2);
        Self {
            n,
            matrix: BandedSpd::zeros(m, KD),
            factor: None,
            z: vec![0.0; n],
            rhs: vec![0.0; m],
            v_hat: vec![0.0; n],
            p_hat: vec![0.0; n],
        }
    }

    /// Lumped mass weight of node `i >= 1`.
    fn mass(&self, dx: f64, i: usize) -> f64 {
        if i + 1 == self.n {
            0.5 * dx
        } else {
            dx
        }
    }

    fn assemble(&mut self, op: &SpatialOperator, dt: f64, delta1: f64) {
        let n = self.n;
        let dx = op.grid.dx;
        let pr = &op.params;
        let k = pr.stiffness();
        let mass = [pr.rho + dt * delta1, pr.mu];
        let dt2 = dt * dt;
        self.matrix.clear();
        for i in 1..n {
            for j in i.saturating_sub(1).max(1)..=(i + 1).min(n - 1) {
                let s = if i == j {
                    if i + 1 == n {
                        1.0 / dx
                    } else {
                        2.0 / dx
                    }
                } else {
                    -1.0 / dx
                };
                let m = if i == j { self.mass(dx, i) } else { 0.0 };
                let (pi, ci) = prolong(n, i);
                let (pj, cj) = prolong(n, j);
                for f in 0..2 {
                    for g in 0..2 {
                        let a = if f == g { m * mass[f] } else { 0.0 } + dt2 * k[f][g] * s;
                        if a == 0.0 {
                            continue;
                        }
                        for &(ni, wi) in &pi[..ci] {
                            for &(nj, wj) in &pj[..cj] {
                                let (r, c) = (dof(ni, f), dof(nj, g));
                                if r >= c {
                                    self.matrix.add_lower(r, c, wi * wj * a);
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    pub fn step(
        &mut self,
        state: &mut SimState,
        history: &mut HistoryBuffer,
        op: &SpatialOperator,
        weights: &WeightProfiles,
        delay: &DelayProfile,
    ) -> Result<(), SolverError> {
        let n = self.n;
        let dt = history.dt();
        let t1 = history.next_time();
        let dx = op.grid.dx;
        let (rho, mu) = (op.params.rho, op.params.mu);
        let before = op.mechanical_energy(state);

        let delta1 = weights.delta1(t1);
        let delta2 = weights.delta2(t1);
        history.sample_into(t1 - delay.tau(t1), &mut self.z)?;

        let key = (dt.to_bits(), delta1.to_bits());
        if self.factor.as_ref().map(|f| (f.0, f.1)) != Some(key) {
            self.assemble(op, dt, delta1);
            self.factor = Some((key.0, key.1, self.matrix.factor()?));
        }

        self.v_hat.copy_from_slice(&state.v);
        self.p_hat.copy_from_slice(&state.p);
        self.v_hat[0] = 0.0;
        self.p_hat[0] = 0.0;
        constrain(&mut self.v_hat);
        constrain(&mut self.p_hat);

        self.rhs.iter_mut().for_each(|x| *x = 0.0);
        let mv = rho + dt * delta1;
        for i in 1..n {
            let m = self.mass(dx, i);
            let bv = m * (mv * self.v_hat[i] + rho * dt * state.vt[i] - dt * dt * delta2 * self.z[i]);
            let bp = m * (mu * self.p_hat[i] + mu * dt * state.pt[i]);
            let (pi, ci) = prolong(n, i);
            for &(node, w) in &pi[..ci] {
                self.rhs[dof(node, 0)] += w * bv;
                self.rhs[dof(node, 1)] += w * bp;
            }
        }
        let (_, _, chol) = self.factor.as_ref().expect("factor assembled above");
        chol.solve_in_place(&mut self.rhs);

        for i in 1..n - 1 {
            state.v[i] = self.rhs[dof(i, 0)];
            state.p[i] = self.rhs[dof(i, 1)];
        }
        state.v[0] = 0.0;
        state.p[0] = 0.0;
        constrain(&mut state.v);
        constrain(&mut state.p);
        for i in 0..n {
            state.vt[i] = (state.v[i] - self.v_hat[i]) / dt;
            state.pt[i] = (state.p[i] - self.p_hat[i]) / dt;
        }
        state.t = t1;
        history.push(&state.vt);

        guard(t1, before, op.mechanical_energy(state))
    }
}

/// Single implicit step from `state`.
pub fn step_implicit(
    state: &SimState,
    history: &mut HistoryBuffer,
    op: &SpatialOperator,
    weights: &WeightProfiles,
    delay: &DelayProfile,
) -> Result<SimState, SolverError> {
    let mut next = state.clone();
    ImplicitStepper::new(state.len()).step(&mut next, history, op, weights, delay)?;
    Ok(next)
}
