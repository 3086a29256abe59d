//! Time loop: steps, per-step energy bookkeeping and sampled output.

use serde::{Deserialize, Serialize};

use super::implicit::constrain;
use super::{
    build_operator, ExplicitStepper, Grid, HistoryBuffer, ImplicitStepper, Integrator, SimState,
    SolverError,
};
use crate::diagnostics::{
    energy_from_parts, lyapunov_k1, lyapunov_k2, lyapunov_k3, EnergyReport, Multipliers,
};
use crate::params::{BeamParams, DelayProfile, StabilityCertificate, WeightProfiles};

/// Everything a run needs besides the initial fields and history.
#[derive(Debug, Clone)]
pub struct RunSpec {
    pub params: BeamParams,
    pub delay: DelayProfile,
    pub weights: WeightProfiles,
    pub certificate: StabilityCertificate,
    pub multipliers: Option<Multipliers>,
    pub grid: Grid,
    pub dt: f64,
    pub steps: usize,
    pub integrator: Integrator,
    /// Record every `output_stride` steps (and always the last one).
    pub output_stride: usize,
    /// Keep full field snapshots every `field_stride` steps.
    pub field_stride: Option<usize>,
}

/// Diagnostics recorded at one output time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub step: usize,
    pub t: f64,
    pub energy: EnergyReport,
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    /// `NaN` when no multipliers were supplied.
    pub lyapunov: f64,
    /// `∫ v_t^2(x, t) dx`.
    pub int_vt2: f64,
    /// `∫ v_t^2(x, t - tau(t)) dx`.
    pub int_vt2_delayed: f64,
    /// `∫_{t-tau}^t e^{lambda (s-t)} ∫ v_t^2 dx ds`.
    pub delay_integral: f64,
    /// Time integral of `int_vt2 + int_vt2_delayed` since `t = 0`.
    pub cum_damping: f64,
    /// Time integral of `delay_integral` since `t = 0`.
    pub cum_delay: f64,
    pub sup_norm: f64,
    /// One-sided estimates of `v_x(L)` and `p_x(L)`.
    pub vx_at_l: f64,
    pub px_at_l: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldSnapshot {
    pub step: usize,
    pub t: f64,
    pub v: Vec<f64>,
    pub vt: Vec<f64>,
    pub p: Vec<f64>,
    pub pt: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub grid: Grid,
    pub dt: f64,
    pub integrator: Integrator,
    pub samples: Vec<Sample>,
    pub fields: Vec<FieldSnapshot>,
    pub final_state: SimState,
}

impl Trajectory {
    pub fn energies(&self) -> Vec<(f64, f64)> {
        self.samples.iter().map(|s| (s.t, s.energy.total)).collect()
    }
}

/// A run that stopped early, with everything recorded up to the failure.
#[derive(Debug, Clone)]
pub struct RunFailure {
    pub step: usize,
    pub error: SolverError,
    pub partial: Trajectory,
}

impl std::fmt::Display for RunFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "step {}: {}", self.step, self.error)
    }
}

impl std::error::Error for RunFailure {}

struct Recorder<'a> {
    spec: &'a RunSpec,
    delayed: Vec<f64>,
    last: Option<(f64, f64, f64)>,
    cum_damping: f64,
    cum_delay: f64,
}

impl Recorder<'_> {
    /// Energy bookkeeping at the newest history time. Must run every step so
    /// the cumulative integrals are trapezoids in time.
    fn observe(
        &mut self,
        step: usize,
        state: &SimState,
        history: &HistoryBuffer,
    ) -> Result<Sample, SolverError> {
        let spec = self.spec;
        let grid = &spec.grid;
        let t = history.newest_time();
        let lower = t - spec.delay.tau(t);
        history.sample_into(lower, &mut self.delayed)?;
        let int_vt2 = grid.norm2(&state.vt);
        let int_vt2_delayed = grid.norm2(&self.delayed);
        let delay_integral =
            history.weighted_integral(lower, spec.certificate.lambda, int_vt2_delayed)?;
        if let Some((t_prev, damp_prev, delay_prev)) = self.last {
            let h = t - t_prev;
            self.cum_damping += 0.5 * h * (damp_prev + int_vt2 + int_vt2_delayed);
            self.cum_delay += 0.5 * h * (delay_prev + delay_integral);
        }
        self.last = Some((t, int_vt2 + int_vt2_delayed, delay_integral));

        let xi = spec.certificate.xi_bar * spec.weights.delta1(t);
        let energy = energy_from_parts(state, grid, &spec.params, xi, delay_integral);
        if !energy.total.is_finite() {
            return Err(SolverError::NonFinite { what: "energy", t });
        }
        let k1 = lyapunov_k1(state, grid, &spec.params);
        let k2 = lyapunov_k2(state, grid, &spec.params);
        let k3 = lyapunov_k3(state, grid, &spec.params);
        let lyapunov = spec
            .multipliers
            .map_or(f64::NAN, |m| m.functional(energy.total, k1, k2, k3));
        Ok(Sample {
            step,
            t,
            energy,
            k1,
            k2,
            k3,
            lyapunov,
            int_vt2,
            int_vt2_delayed,
            delay_integral,
            cum_damping: self.cum_damping,
            cum_delay: self.cum_delay,
            sup_norm: state.sup_norm(),
            vx_at_l: grid.right_slope(&state.v),
            px_at_l: grid.right_slope(&state.p),
        })
    }
}

enum Stepper {
    Explicit(ExplicitStepper),
    Implicit(ImplicitStepper),
}

fn snapshot(step: usize, state: &SimState) -> FieldSnapshot {
    FieldSnapshot {
        step,
        t: state.t,
        v: state.v.clone(),
        vt: state.vt.clone(),
        p: state.p.clone(),
        pt: state.pt.clone(),
    }
}

/// Integrates `spec.steps` steps from `initial`, whose newest history
/// snapshot is replaced by the initial velocity.
pub fn run(
    spec: &RunSpec,
    initial: SimState,
    mut history: HistoryBuffer,
) -> Result<Trajectory, Box<RunFailure>> {
    let mut state = initial;
    let mut out = Trajectory {
        grid: spec.grid,
        dt: spec.dt,
        integrator: spec.integrator,
        samples: Vec::new(),
        fields: Vec::new(),
        final_state: state.clone(),
    };
    let fail = |step: usize, error: SolverError, partial: Trajectory| {
        Box::new(RunFailure {
            step,
            error,
            partial,
        })
    };

    let setup = (|| {
        if state.len() != spec.grid.n {
            return Err(SolverError::config(
                "initial state length",
                state.len() as f64,
                "must equal the node count",
            ));
        }
        if (history.dt() - spec.dt).abs() > 1e-15 * spec.dt || history.newest_index() != 0 {
            return Err(SolverError::config(
                "history",
                history.newest_time(),
                "must end at t = 0 with the run's dt",
            ));
        }
        if spec.output_stride == 0 {
            return Err(SolverError::config("output_stride", 0.0, "must be >= 1"));
        }
        build_operator(&spec.params, &spec.grid)
    })();
    let op = match setup {
        Ok(op) => op,
        Err(e) => return Err(fail(0, e, out)),
    };

    for f in [&mut state.v, &mut state.vt, &mut state.p, &mut state.pt] {
        f[0] = 0.0;
    }
    if spec.integrator == Integrator::Implicit {
        constrain(&mut state.v);
        constrain(&mut state.p);
    }
    state.t = 0.0;
    history.replace_newest(&state.vt);

    let mut recorder = Recorder {
        spec,
        delayed: vec![0.0; spec.grid.n],
        last: None,
        cum_damping: 0.0,
        cum_delay: 0.0,
    };
    match recorder.observe(0, &state, &history) {
        Ok(s) => out.samples.push(s),
        Err(e) => return Err(fail(0, e, out)),
    }
    if spec.field_stride.is_some() {
        out.fields.push(snapshot(0, &state));
    }

    let mut stepper = match spec.integrator {
        Integrator::Explicit => Stepper::Explicit(ExplicitStepper::new(spec.grid.n)),
        Integrator::Implicit => Stepper::Implicit(ImplicitStepper::new(spec.grid.n)),
    };
    for step in 1..=spec.steps {
        let result = match &mut stepper {
            Stepper::Explicit(s) => s.step(&mut state, &mut history, &op, &spec.weights, &spec.delay),
            Stepper::Implicit(s) => s.step(&mut state, &mut history, &op, &spec.weights, &spec.delay),
        }
        .and_then(|_| recorder.observe(step, &state, &history));
        let sample = match result {
            Ok(s) => s,
            Err(e) => {
                out.final_state = state;
                return Err(fail(step, e, out));
            }
        };
        if step % spec.output_stride == 0 || step == spec.steps {
            out.samples.push(sample);
        }
        if let Some(stride) = spec.field_stride {
            if stride > 0 && (step % stride == 0 || step == spec.steps) {
                out.fields.push(snapshot(step, &state));
            }
        }
    }
    out.final_state = state;
    Ok(out)
}
