//! Discrete checks of the energy and Lyapunov decrease inequalities.

use serde::{Deserialize, Serialize};

use crate::params::StabilityCertificate;
use crate::solver::Trajectory;

/// Constant in `tol_num = C_TOL (dt^2 + dx^2) max(E(0), 1)`.
pub const C_TOL: f64 = 10.0;

pub fn numerical_tolerance(dt: f64, dx: f64, e0: f64) -> f64 {
    C_TOL * (dt * dt + dx * dx) * e0.max(1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DissipationReport {
    pub pairs: usize,
    pub violations: usize,
    /// Smallest `rhs + tol - lhs` over all pairs (`None` when there are none);
    /// negative means violated.
    pub worst_margin: Option<f64>,
    pub worst_t: Option<f64>,
    pub tol_num: f64,
}

impl DissipationReport {
    pub fn pass(&self) -> bool {
        self.violations == 0
    }
}

fn scan(
    pairs: impl Iterator<Item = (f64, f64, f64)>,
    tol_num: f64,
) -> DissipationReport {
    let mut report = DissipationReport {
        pairs: 0,
        violations: 0,
        worst_margin: None,
        worst_t: None,
        tol_num,
    };
    for (t, lhs, rhs) in pairs {
        report.pairs += 1;
        let margin = rhs + tol_num - lhs;
        if !(margin >= 0.0) {
            report.violations += 1;
        }
        if report.worst_margin.is_none_or(|w| margin < w) {
            report.worst_margin = Some(margin);
            report.worst_t = Some(t);
        }
    }
    report
}

/// `ΔE/Δt <= -C (∫v_t^2 + ∫v_t^2(t-τ)) - C (delay integral) + tol_num` on
/// consecutive samples, with the damping terms averaged over each interval.
pub fn energy_dissipation_check(
    trajectory: &Trajectory,
    certificate: &StabilityCertificate,
) -> DissipationReport {
    let s = &trajectory.samples;
    let e0 = s.first().map_or(0.0, |x| x.energy.total);
    let tol = numerical_tolerance(trajectory.dt, trajectory.grid.dx, e0);
    let c = certificate.c;
    scan(
        s.windows(2).map(|w| {
            let h = w[1].t - w[0].t;
            let lhs = (w[1].energy.total - w[0].energy.total) / h;
            let rhs = -c * (w[1].cum_damping - w[0].cum_damping) / h
                - c * (w[1].cum_delay - w[0].cum_delay) / h;
            (w[1].t, lhs, rhs)
        }),
        tol,
    )
}

/// `ΔL/Δt <= tol_num (N + N1 + N2 + N3)` on consecutive samples.
pub fn lyapunov_decrease_check(trajectory: &Trajectory, multiplier_sum: f64) -> DissipationReport {
    let s = &trajectory.samples;
    let e0 = s.first().map_or(0.0, |x| x.energy.total);
    let tol = numerical_tolerance(trajectory.dt, trajectory.grid.dx, e0) * multiplier_sum;
    scan(
        s.windows(2)
            .map(|w| (w[1].t, (w[1].lyapunov - w[0].lyapunov) / (w[1].t - w[0].t), 0.0)),
        tol,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::EnergyReport;
    use crate::solver::{Grid, Integrator, Sample, SimState};

    fn sample(t: f64, e: f64, cum_damping: f64, cum_delay: f64) -> Sample {
        Sample {
            step: 0,
            t,
            energy: EnergyReport {
                t,
                kinetic_v: e,
                kinetic_p: 0.0,
                elastic: 0.0,
                coupling: 0.0,
                delay_term: 0.0,
                total: e,
            },
            k1: 0.0,
            k2: 0.0,
            k3: 0.0,
            lyapunov: 2.0 * e,
            int_vt2: 0.0,
            int_vt2_delayed: 0.0,
            delay_integral: 0.0,
            cum_damping,
            cum_delay,
            sup_norm: 0.0,
            vx_at_l: 0.0,
            px_at_l: 0.0,
        }
    }

    fn trajectory(samples: Vec<Sample>) -> Trajectory {
        Trajectory {
            grid: Grid::new(11, 1.0).unwrap(),
            dt: 0.01,
            integrator: Integrator::Explicit,
            samples,
            fields: Vec::new(),
            final_state: SimState::zeros(11),
        }
    }

    fn cert(c: f64) -> StabilityCertificate {
        StabilityCertificate {
            xi_bar: 0.0,
            lambda: 1.0,
            c1: c,
            c2: c,
            c3: c,
            c,
            valid: true,
            violations: Vec::new(),
        }
    }

    #[test]
    fn single_sample_is_empty() {
        let r = energy_dissipation_check(&trajectory(vec![sample(0.0, 1.0, 0.0, 0.0)]), &cert(1.0));
        assert_eq!(r.pairs, 0);
        assert!(r.pass());
        assert!(r.worst_margin.is_none());
    }

    #[test]
    fn conservation_limit() {
        // C = 0: only growth beyond tol_num is a violation.
        let tol = numerical_tolerance(0.01, 0.1, 1.0);
        let ok = trajectory(vec![sample(0.0, 1.0, 0.0, 0.0), sample(1.0, 1.0 + 0.5 * tol, 0.0, 0.0)]);
        assert!(energy_dissipation_check(&ok, &cert(0.0)).pass());
        let bad = trajectory(vec![sample(0.0, 1.0, 0.0, 0.0), sample(1.0, 1.0 + 2.0 * tol, 0.0, 0.0)]);
        assert_eq!(energy_dissipation_check(&bad, &cert(0.0)).violations, 1);
    }

    #[test]
    fn decay_must_beat_damping_budget() {
        // ∫ damping = 1 over [0, 1] with C = 0.5: E must drop by at least 0.5.
        let enough = trajectory(vec![sample(0.0, 2.0, 0.0, 0.0), sample(1.0, 1.4, 1.0, 0.0)]);
        assert!(energy_dissipation_check(&enough, &cert(0.5)).pass());
        let short = trajectory(vec![sample(0.0, 2.0, 0.0, 0.0), sample(1.0, 1.9, 1.0, 0.0)]);
        let r = energy_dissipation_check(&short, &cert(0.5));
        assert_eq!(r.violations, 1);
        assert!(r.worst_margin.unwrap() < 0.0);
    }

    #[test]
    fn lyapunov_growth_flagged() {
        let t = trajectory(vec![sample(0.0, 1.0, 0.0, 0.0), sample(1.0, 2.0, 0.0, 0.0)]);
        assert_eq!(lyapunov_decrease_check(&t, 1.0).violations, 1);
        let t = trajectory(vec![sample(0.0, 2.0, 0.0, 0.0), sample(1.0, 1.0, 0.0, 0.0)]);
        assert!(lyapunov_decrease_check(&t, 1.0).pass());
    }
}
