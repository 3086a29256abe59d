//! Shared fixtures for the solver benchmarks.

use piezobeam::scenario::preset;
use piezobeam::solver::{HistoryBuffer, RunSpec, SimState};
use piezobeam::Scenario;

/// The certified preset at `n` nodes with the given horizon.
pub fn scenario(n: usize, horizon_s: f64) -> Scenario {
    let mut s = preset("certified-decay").expect("preset exists");
    s.numerics.n = n;
    s.numerics.horizon_s = horizon_s;
    s
}

/// Run inputs of [`scenario`].
pub fn fixture(n: usize) -> (RunSpec, SimState, HistoryBuffer) {
    let s = scenario(n, 1.0);
    let check = s.check().expect("preset checks");
    s.run_inputs(&check.certificate, None).expect("preset builds")
}
