use piezobeam::scenario::{preset, InitialConfig, RunStatus, PRESET_NAMES};
use piezobeam::solver::Integrator;
use piezobeam::Scenario;
use proptest::prelude::*;

fn short(name: &str, n: usize, horizon: f64) -> Scenario {
    let mut s = preset(name).unwrap();
    s.numerics.n = n;
    s.numerics.horizon_s = horizon;
    s.numerics.output_stride = 1;
    s
}

#[test]
fn presets_round_trip_through_json() {
    for name in PRESET_NAMES {
        let s = preset(name).unwrap();
        let back = Scenario::from_json(&s.to_json()).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.to_json(), s.to_json());
    }
}

#[test]
fn both_integrators_decay_on_damped_preset() {
    for integrator in [Integrator::Explicit, Integrator::Implicit] {
        let mut s = short("damped-no-delay", 61, 8.0);
        s.numerics.integrator = integrator;
        let sim = s.simulate().unwrap();
        assert_eq!(sim.summary.status, RunStatus::Ok);
        assert!(sim.summary.decay_fit.unwrap().h2 > 0.0);
        assert!(sim.summary.dissipation.as_ref().unwrap().pass());
        assert!(sim.summary.max_boundary_slope < 1e-2);
    }
}

#[test]
fn horizon_is_hit_exactly() {
    let s = short("certified-decay", 41, 3.3);
    let (_, dt, steps) = s.time_grid().unwrap();
    assert!((dt * steps as f64 - 3.3).abs() < 1e-12);
    let sim = s.simulate().unwrap();
    assert!((sim.trajectory.samples.last().unwrap().t - 3.3).abs() < 1e-9);
}

#[test]
fn pluck_preset_runs() {
    let mut s = short("certified-decay", 41, 2.0);
    s.initial = InitialConfig::Pluck {
        amplitude: 0.1,
        peak_m: 0.5,
    };
    let sim = s.simulate().unwrap();
    assert_eq!(sim.summary.status, RunStatus::Ok);
    let e: Vec<f64> = sim.trajectory.energies().into_iter().map(|p| p.1).collect();
    assert!(e.last().unwrap() < &e[0]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn energy_components_non_negative(
        gamma in 0.0..0.6f64,
        beta0 in 0.0..0.85f64,
        amplitude in -2.0..2.0f64,
        implicit in any::<bool>(),
    ) {
        let mut s = short("certified-decay", 31, 2.0);
        s.beam.gamma = gamma;
        s.weights.beta0 = Some(beta0);
        s.initial = InitialConfig::FundamentalMode { amplitude };
        s.numerics.integrator = if implicit { Integrator::Implicit } else { Integrator::Explicit };
        let sim = s.simulate().unwrap();
        prop_assert_eq!(sim.summary.status, RunStatus::Ok);
        for sample in &sim.trajectory.samples {
            let e = sample.energy;
            for part in [e.kinetic_v, e.kinetic_p, e.elastic, e.coupling, e.delay_term] {
                prop_assert!(part >= 0.0);
            }
            let sum = e.kinetic_v + e.kinetic_p + e.elastic + e.coupling + e.delay_term;
            prop_assert!((sum - e.total).abs() <= 1e-12 * e.total.max(1e-300));
        }
    }
}
