use serde::{Deserialize, Serialize};

use super::{CheckOutcome, Scenario, ScenarioError};
use crate::diagnostics::{
    energy_dissipation_check, fit_decay_rate, lyapunov_decrease_check, lyapunov_equivalence,
    proof_inequalities, DecayFit, DissipationReport, Equivalence, Multipliers, ProofInequalities,
};
use crate::solver::{run, Integrator, SolverError, Trajectory};

/// Minimum `r²` for the decay fit to count as exponential.
pub const MIN_R_SQUARED: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Ok,
    Diverged,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryFailure {
    pub step: usize,
    pub t: f64,
    pub message: String,
}

/// Contents of `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub scenario: String,
    pub status: RunStatus,
    pub failure: Option<SummaryFailure>,
    pub integrator: Integrator,
    pub n: usize,
    pub dx: f64,
    pub dt: f64,
    pub steps: usize,
    pub horizon_s: f64,
    pub assumptions_pass: bool,
    pub certificate: crate::params::StabilityCertificate,
    pub multipliers: Option<Multipliers>,
    pub multiplier_error: Option<String>,
    pub proof_inequalities: Option<ProofInequalities>,
    pub equivalence: Option<Equivalence>,
    pub decay_fit: Option<DecayFit>,
    pub decay_error: Option<String>,
    /// Certificate rate bound `C / b2`, reported next to the fitted `H2`.
    pub c_over_b2: Option<f64>,
    /// Only for valid certificates.
    pub dissipation: Option<DissipationReport>,
    pub lyapunov_decrease: Option<DissipationReport>,
    pub energy_initial: f64,
    pub energy_final: f64,
    pub energy_ratio: Option<f64>,
    pub max_boundary_slope: f64,
}

impl Summary {
    pub fn decay_pass(&self) -> bool {
        self.status == RunStatus::Ok
            && self
                .decay_fit
                .is_some_and(|f| f.h2 > 0.0 && f.r_squared >= MIN_R_SQUARED)
    }

    /// Decay, dissipation and equivalence all pass.
    pub fn verified(&self) -> bool {
        self.decay_pass()
            && self.dissipation.as_ref().is_some_and(|d| d.pass())
            && self.equivalence.is_some_and(|e| e.pass)
    }
}

/// A finished or stopped run with its analysis.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub check: CheckOutcome,
    pub summary: Summary,
    /// Partial when the run stopped early.
    pub trajectory: Trajectory,
    pub failure: Option<SolverError>,
}

impl Scenario {
    /// Certificate, multipliers, the run and its diagnostics. Solver failures
    /// end up in the summary; only configuration problems are errors.
    pub fn simulate(&self) -> Result<Simulation, ScenarioError> {
        let check = self.check()?;
        let certificate = &check.certificate;
        let (multipliers, multiplier_error) = if certificate.valid {
            match self.multipliers(certificate) {
                Ok(m) => (Some(m), None),
                Err(e) => (None, Some(e.to_string())),
            }
        } else {
            (None, Some("certificate is not valid".to_string()))
        };
        let (spec, initial, history) = self.run_inputs(certificate, multipliers)?;
        let (trajectory, failure) = match run(&spec, initial, history) {
            Ok(t) => (t, None),
            Err(f) => {
                let f = *f;
                (f.partial, Some((f.step, f.error)))
            }
        };

        let inequalities = multipliers.and_then(|m| {
            proof_inequalities(
                &spec.params,
                spec.weights.delta1(0.0),
                spec.weights.beta0,
                certificate,
                &self.multipliers,
                &m,
            )
            .ok()
        });
        let equivalence = multipliers.and_then(|_| {
            lyapunov_equivalence(
                trajectory
                    .samples
                    .iter()
                    .map(|s| (s.energy.total, s.lyapunov)),
            )
            .ok()
        });
        let (decay_fit, decay_error) =
            match fit_decay_rate(&trajectory.energies(), self.numerics.fit_window_fraction) {
                Ok(f) => (Some(f), None),
                Err(e) => (None, Some(e.to_string())),
            };
        let energy_initial = trajectory.samples.first().map_or(0.0, |s| s.energy.total);
        let energy_final = trajectory.samples.last().map_or(0.0, |s| s.energy.total);
        let summary = Summary {
            scenario: self.name.clone(),
            status: if failure.is_some() {
                RunStatus::Diverged
            } else {
                RunStatus::Ok
            },
            failure: failure.as_ref().map(|(step, e)| SummaryFailure {
                step: *step,
                t: *step as f64 * spec.dt,
                message: e.to_string(),
            }),
            integrator: spec.integrator,
            n: spec.grid.n,
            dx: spec.grid.dx,
            dt: spec.dt,
            steps: spec.steps,
            horizon_s: self.numerics.horizon_s,
            assumptions_pass: check.assumptions.pass,
            certificate: certificate.clone(),
            multipliers,
            multiplier_error,
            proof_inequalities: inequalities,
            equivalence,
            decay_fit,
            decay_error,
            c_over_b2: equivalence.map(|e| certificate.c / e.b2),
            dissipation: certificate
                .valid
                .then(|| energy_dissipation_check(&trajectory, certificate)),
            lyapunov_decrease: multipliers.map(|m| lyapunov_decrease_check(&trajectory, m.sum())),
            energy_initial,
            energy_final,
            energy_ratio: (energy_initial > 0.0).then(|| energy_final / energy_initial),
            max_boundary_slope: trajectory
                .samples
                .iter()
                .map(|s| s.vx_at_l.abs().max(s.px_at_l.abs()))
                .fold(0.0, f64::max),
        };
        Ok(Simulation {
            check,
            summary,
            trajectory,
            failure: failure.map(|(_, e)| e),
        })
    }
}
