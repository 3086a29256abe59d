use super::{
    DelayConfig, DelayGainConfig, InitialConfig, NumericsConfig, Scenario, ScenarioError,
    WeightsConfig,
};
use crate::diagnostics::{MultiplierConstants, DEFAULT_WINDOW_FRACTION};
use crate::params::{BeamParams, CertificateOverrides, DampingShape, DelayShape, DEFAULT_SAMPLES};
use crate::solver::Integrator;

pub const PRESET_NAMES: [&str; 4] = [
    "certified-decay",
    "damped-no-delay",
    "undamped",
    "infeasible-ratio",
];

fn beam() -> BeamParams {
    BeamParams {
        rho: 1.0,
        alpha: 2.0,
        gamma: 0.5,
        mu: 1.0,
        beta: 1.0,
        length: 1.0,
    }
}

fn numerics(horizon_s: f64) -> NumericsConfig {
    NumericsConfig {
        n: 201,
        cfl_safety: 0.5,
        integrator: Integrator::Explicit,
        horizon_s,
        output_stride: 10,
        field_stride: Some(2000),
        dt_s: None,
        assumption_samples: DEFAULT_SAMPLES,
        fit_window_fraction: DEFAULT_WINDOW_FRACTION,
    }
}

fn certified_decay() -> Scenario {
    Scenario {
        name: "certified-decay".into(),
        beam: beam(),
        delay: DelayConfig {
            shape: DelayShape::Sinusoid {
                mean_s: 0.5,
                amplitude_s: 0.09,
                omega_rad_per_s: 2.0,
            },
            tau0_s: Some(0.4),
            tau_bar_s: Some(0.6),
            d: Some(0.19),
        },
        weights: WeightsConfig {
            delta1: DampingShape::ExponentialToFloor {
                floor: 1.0,
                excess: 0.5,
                rate_per_s: 0.5,
            },
            delta2: DelayGainConfig::Modulated {
                ratio: None,
                omega_rad_per_s: 2.0,
            },
            delta0: Some(1.0),
            beta0: Some(0.3),
            m1: None,
            m2: None,
        },
        initial: InitialConfig::FundamentalMode { amplitude: 1.0 },
        numerics: numerics(40.0),
        certificate: CertificateOverrides::default(),
        multipliers: MultiplierConstants::default(),
    }
}

fn damped_no_delay() -> Scenario {
    Scenario {
        name: "damped-no-delay".into(),
        delay: DelayConfig {
            shape: DelayShape::Constant { tau_s: 0.5 },
            tau0_s: None,
            tau_bar_s: None,
            d: None,
        },
        weights: WeightsConfig {
            delta1: DampingShape::Constant { value: 1.0 },
            delta2: DelayGainConfig::Constant { value: 0.0 },
            delta0: None,
            beta0: None,
            m1: None,
            m2: None,
        },
        numerics: numerics(20.0),
        ..certified_decay()
    }
}

fn undamped() -> Scenario {
    Scenario {
        name: "undamped".into(),
        weights: WeightsConfig {
            delta1: DampingShape::Constant { value: 0.0 },
            delta2: DelayGainConfig::Constant { value: 0.0 },
            delta0: Some(0.0),
            beta0: Some(0.0),
            m1: None,
            m2: None,
        },
        numerics: numerics(10.0),
        certificate: CertificateOverrides {
            xi_bar: Some(0.0),
            ..CertificateOverrides::default()
        },
        ..damped_no_delay()
    }
}

fn infeasible_ratio() -> Scenario {
    let mut s = certified_decay();
    s.name = "infeasible-ratio".into();
    s.weights.beta0 = Some(0.95);
    s
}

pub fn preset(name: &str) -> Result<Scenario, ScenarioError> {
    Ok(match name {
        "certified-decay" => certified_decay(),
        "damped-no-delay" => damped_no_delay(),
        "undamped" => undamped(),
        "infeasible-ratio" => infeasible_ratio(),
        _ => return Err(ScenarioError::UnknownPreset(name.to_string())),
    })
}
