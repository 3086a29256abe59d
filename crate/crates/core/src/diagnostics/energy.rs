use serde::{Deserialize, Serialize};

use crate::params::{BeamParams, DelayProfile, StabilityCertificate, WeightProfiles};
use crate::solver::{Grid, HistoryBuffer, SimState, SolverError};

/// Components of the delay-augmented energy at time `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub t: f64,
    pub kinetic_v: f64,
    pub kinetic_p: f64,
    pub elastic: f64,
    pub coupling: f64,
    pub delay_term: f64,
    pub total: f64,
}

/// Energy from the fields and a precomputed weighted delay integral
/// `∫_{t-tau}^t e^{lambda (s-t)} ∫ v_t^2 dx ds`.
pub fn energy_from_parts(
    state: &SimState,
    grid: &Grid,
    params: &BeamParams,
    xi: f64,
    delay_integral: f64,
) -> EnergyReport {
    let kinetic_v = 0.5 * params.rho * grid.norm2(&state.vt);
    let kinetic_p = 0.5 * params.mu * grid.norm2(&state.pt);
    let elastic = 0.5 * params.alpha1() * grid.gradient_inner(&state.v, &state.v);
    let g = params.gamma;
    let twist: f64 = state
        .v
        .windows(2)
        .zip(state.p.windows(2))
        .map(|(v, p)| (g * (v[1] - v[0]) - (p[1] - p[0])).powi(2))
        .sum();
    let coupling = 0.5 * params.beta * twist / grid.dx;
    let delay_term = 0.5 * xi * delay_integral;
    EnergyReport {
        t: state.t,
        kinetic_v,
        kinetic_p,
        elastic,
        coupling,
        delay_term,
        total: kinetic_v + kinetic_p + elastic + coupling + delay_term,
    }
}

/// Energy at the newest history time, which must match `state.t`.
pub fn energy(
    state: &SimState,
    history: &HistoryBuffer,
    params: &BeamParams,
    certificate: &StabilityCertificate,
    delay: &DelayProfile,
    weights: &WeightProfiles,
) -> Result<EnergyReport, SolverError> {
    let grid = *history.grid();
    let t = history.newest_time();
    let lower = t - delay.tau(t);
    let delayed = history.sample(lower)?;
    let integral = history.weighted_integral(lower, certificate.lambda, grid.norm2(&delayed))?;
    let xi = certificate.xi_bar * weights.delta1(t);
    Ok(energy_from_parts(state, &grid, params, xi, integral))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{DampingShape, DelayGainShape};
    use crate::solver::init_history;
    use std::f64::consts::PI;

    fn certificate(xi_bar: f64, lambda: f64) -> StabilityCertificate {
        StabilityCertificate {
            xi_bar,
            lambda,
            c1: 1.0,
            c2: 1.0,
            c3: 1.0,
            c: 1.0,
            valid: true,
            violations: Vec::new(),
        }
    }

    fn unit_weights() -> WeightProfiles {
        WeightProfiles::new(
            DampingShape::Constant { value: 1.0 },
            DelayGainShape::Constant { value: 0.0 },
        )
    }

    #[test]
    fn zero_state_zero_energy() {
        let params = BeamParams::new(1.0, 2.0, 0.5, 1.0, 1.0, 1.0).unwrap();
        let grid = Grid::new(11, 1.0).unwrap();
        let delay = DelayProfile::constant(0.3);
        let h = init_history(&grid, &delay, |_, _| 0.0, 0.01).unwrap();
        let e = energy(&SimState::zeros(11), &h, &params, &certificate(1.0, 1.0), &delay, &unit_weights())
            .unwrap();
        assert_eq!(e.total, 0.0);
    }

    #[test]
    fn uniform_velocity_kinetic_only() {
        let params = BeamParams::new(2.0, 2.0, 0.5, 1.0, 1.0, 1.0).unwrap();
        let grid = Grid::new(11, 1.0).unwrap();
        let delay = DelayProfile::constant(0.3);
        let h = init_history(&grid, &delay, |_, _| 1.0, 0.01).unwrap();
        let mut s = SimState::zeros(11);
        s.vt = vec![1.0; 11];
        let e = energy(&s, &h, &params, &certificate(0.0, 1.0), &delay, &unit_weights()).unwrap();
        assert!((e.total - 1.0).abs() < 1e-14);
        assert!((e.kinetic_v - 1.0).abs() < 1e-14);
        assert_eq!(e.delay_term, 0.0);
    }

    #[test]
    fn gradient_terms_match_reference_quadrature() {
        let params = BeamParams::new(1.0, 2.0, 0.5, 1.0, 1.0, 1.0).unwrap();
        let k = PI / 2.0;
        // 10^4-point midpoint reference for ∫ (k cos kx)^2.
        let m = 10_000;
        let reference: f64 = (0..m)
            .map(|j| {
                let x = (j as f64 + 0.5) / m as f64;
                (k * (k * x).cos()).powi(2)
            })
            .sum::<f64>()
            / m as f64;
        let grid = Grid::new(1001, 1.0).unwrap();
        let mut s = SimState::zeros(1001);
        s.v = grid.nodes().iter().map(|x| (k * x).sin()).collect();
        let e = energy_from_parts(&s, &grid, &params, 0.0, 0.0);
        let want_elastic = 0.5 * params.alpha1() * reference;
        let want_coupling = 0.5 * params.beta * params.gamma.powi(2) * reference;
        assert!((e.elastic - want_elastic).abs() < 1e-6 * want_elastic);
        assert!((e.coupling - want_coupling).abs() < 1e-6 * want_coupling);
    }

    #[test]
    fn delay_term_closed_form() {
        // v_t ≡ 1 on the history, lambda = 1, tau = 0.5: ∫_{-0.5}^0 e^s ds.
        let params = BeamParams::new(1.0, 2.0, 0.5, 1.0, 1.0, 1.0).unwrap();
        let grid = Grid::new(11, 1.0).unwrap();
        let delay = DelayProfile::constant(0.5);
        let h = init_history(&grid, &delay, |_, _| 1.0, 0.001).unwrap();
        let mut s = SimState::zeros(11);
        s.vt = vec![1.0; 11];
        let e = energy(&s, &h, &params, &certificate(1.0, 1.0), &delay, &unit_weights()).unwrap();
        let exact = 0.5 * (1.0 - (-0.5f64).exp());
        assert!((e.delay_term - exact).abs() < 1e-7);
    }
}
