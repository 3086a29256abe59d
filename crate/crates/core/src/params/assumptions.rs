//! Sampled verification of the delay and weight hypotheses.

use serde::{Deserialize, Serialize};

use super::{DelayProfile, ParamsError, WeightProfiles};

/// Default number of uniform samples over the horizon.
pub const DEFAULT_SAMPLES: usize = 4096;

/// Slack granted to non-strict inequalities, relative to `max(1, |limit|)`.
const ROUNDING_SLACK: f64 = 1e-12;

/// One hypothesis on `tau`, `delta1` or `delta2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Condition {
    /// `tau0 > 0`.
    DelayPositive,
    /// `tau(t) >= tau0`.
    DelayLowerBound,
    /// `tau(t) <= tau_bar`.
    DelayUpperBound,
    /// `tau'(t) <= d`.
    DelaySlope,
    /// `d < 1`.
    DelaySlopeBelowOne,
    /// `tau''` finite on the horizon.
    DelayCurvature,
    /// `delta0 > 0`.
    DampingFloorPositive,
    /// `delta1(t) >= delta0`.
    DampingFloor,
    /// `delta1' <= 0`.
    DampingNonIncreasing,
    /// `|delta1' / delta1| <= M1`.
    DampingLogRate,
    /// `|delta2| <= beta0 * delta1` with `0 <= beta0 < sqrt(1 - d)`.
    DelayedGainRatio,
    /// `|delta2'| <= M2 * delta1`.
    DelayedGainRate,
}

impl Condition {
    pub fn id(self) -> &'static str {
        match self {
            Condition::DelayPositive => "delay-positive",
            Condition::DelayLowerBound => "delay-lower-bound",
            Condition::DelayUpperBound => "delay-upper-bound",
            Condition::DelaySlope => "delay-slope",
            Condition::DelaySlopeBelowOne => "delay-slope-below-one",
            Condition::DelayCurvature => "delay-curvature",
            Condition::DampingFloorPositive => "damping-floor-positive",
            Condition::DampingFloor => "damping-floor",
            Condition::DampingNonIncreasing => "damping-non-increasing",
            Condition::DampingLogRate => "damping-log-rate",
            Condition::DelayedGainRatio => "delayed-gain-ratio",
            Condition::DelayedGainRate => "delayed-gain-rate",
        }
    }

    pub fn statement(self) -> &'static str {
        match self {
            Condition::DelayPositive => "tau0 > 0",
            Condition::DelayLowerBound => "tau(t) >= tau0",
            Condition::DelayUpperBound => "tau(t) <= tau_bar",
            Condition::DelaySlope => "tau'(t) <= d",
            Condition::DelaySlopeBelowOne => "d < 1",
            Condition::DelayCurvature => "tau''(t) bounded",
            Condition::DampingFloorPositive => "delta0 > 0",
            Condition::DampingFloor => "delta1(t) >= delta0",
            Condition::DampingNonIncreasing => "delta1 non-increasing",
            Condition::DampingLogRate => "|delta1'(t)/delta1(t)| <= M1",
            Condition::DelayedGainRatio => {
                "|delta2(t)| <= beta0*delta1(t) with 0 <= beta0 < sqrt(1-d)"
            }
            Condition::DelayedGainRate => "|delta2'(t)| <= M2*delta1(t)",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionCheck {
    pub condition: Condition,
    pub statement: String,
    /// Worst sampled slack; negative means violated. `None` for qualitative
    /// checks (boundedness).
    pub margin: Option<f64>,
    /// Time of the worst sample, when the check is sampled.
    pub at_t: Option<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub horizon: f64,
    pub samples: usize,
    pub checks: Vec<AssumptionCheck>,
    pub pass: bool,
}

impl AssumptionReport {
    pub fn check(&self, condition: Condition) -> Option<&AssumptionCheck> {
        self.checks.iter().find(|c| c.condition == condition)
    }

    pub fn failed(&self) -> impl Iterator<Item = &AssumptionCheck> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

/// Tracks the minimum of a sampled slack.
struct Worst {
    margin: f64,
    at_t: f64,
}

impl Worst {
    fn new() -> Self {
        Self {
            margin: f64::INFINITY,
            at_t: 0.0,
        }
    }

    fn update(&mut self, margin: f64, t: f64) {
        if margin < self.margin {
            self.margin = margin;
            self.at_t = t;
        }
    }
}

fn finite(profile: &'static str, t: f64, value: f64) -> Result<f64, ParamsError> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(ParamsError::Evaluation { profile, t })
    }
}

fn sampled(condition: Condition, worst: Worst, limit: f64) -> AssumptionCheck {
    let pass = worst.margin >= -ROUNDING_SLACK * limit.abs().max(1.0);
    AssumptionCheck {
        condition,
        statement: condition.statement().to_string(),
        margin: Some(worst.margin),
        at_t: Some(worst.at_t),
        pass,
    }
}

fn strict(condition: Condition, margin: f64) -> AssumptionCheck {
    AssumptionCheck {
        condition,
        statement: condition.statement().to_string(),
        margin: Some(margin),
        at_t: None,
        pass: margin > 0.0,
    }
}

/// Sample times: `samples` uniform points on `[0, horizon]` plus the
/// analytic extrema of the built-in families.
fn sample_times(
    delay: &DelayProfile,
    weights: &WeightProfiles,
    horizon: f64,
    samples: usize,
) -> Vec<f64> {
    let mut times: Vec<f64> = (0..samples)
        .map(|i| horizon * i as f64 / (samples - 1) as f64)
        .collect();
    times.extend(delay.critical_times(horizon));
    times.extend(weights.critical_times(horizon));
    times.sort_by(f64::total_cmp);
    times.dedup();
    times
}

/// Checks every delay and weight hypothesis on a sampled horizon.
pub fn validate_assumptions(
    delay: &DelayProfile,
    weights: &WeightProfiles,
    horizon: f64,
    samples: usize,
) -> Result<AssumptionReport, ParamsError> {
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(ParamsError::invalid("horizon", horizon, "must be finite and > 0"));
    }
    if samples < 2 {
        return Err(ParamsError::invalid(
            "samples",
            samples as f64,
            "at least 2 samples are required",
        ));
    }

    let mut lower = Worst::new();
    let mut upper = Worst::new();
    let mut slope = Worst::new();
    let mut curvature: f64 = 0.0;
    let mut floor = Worst::new();
    let mut monotone = Worst::new();
    let mut log_rate = Worst::new();
    let mut ratio = Worst::new();
    let mut rate = Worst::new();

    for t in sample_times(delay, weights, horizon, samples) {
        let tau = finite("tau", t, delay.tau(t))?;
        let tau_p = finite("tau'", t, delay.tau_prime(t))?;
        let tau_pp = finite("tau''", t, delay.tau_second(t))?;
        let d1 = finite("delta1", t, weights.delta1(t))?;
        let d1_p = finite("delta1'", t, weights.delta1_prime(t))?;
        let d2 = finite("delta2", t, weights.delta2(t))?;
        let d2_p = finite("delta2'", t, weights.delta2_prime(t))?;

        lower.update(tau - delay.tau0, t);
        upper.update(delay.tau_bar - tau, t);
        slope.update(delay.d - tau_p, t);
        curvature = curvature.max(tau_pp.abs());
        floor.update(d1 - weights.delta0, t);
        monotone.update(-d1_p, t);
        let log_rate_value = if d1 > 0.0 {
            (d1_p / d1).abs()
        } else if d1_p == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        log_rate.update(weights.m1 - log_rate_value, t);
        ratio.update(weights.beta0 * d1 - d2.abs(), t);
        rate.update(weights.m2 * d1 - d2_p.abs(), t);
    }

    let feasible_margin = (1.0 - delay.d).max(0.0).sqrt() - weights.beta0;
    let mut ratio_check = sampled(Condition::DelayedGainRatio, ratio, weights.beta0);
    let ratio_margin = ratio_check.margin.unwrap_or(f64::NEG_INFINITY);
    ratio_check.margin = Some(ratio_margin.min(feasible_margin));
    ratio_check.pass &= feasible_margin > 0.0 && weights.beta0 >= 0.0 && delay.d < 1.0;

    let checks = vec![
        strict(Condition::DelayPositive, delay.tau0),
        sampled(Condition::DelayLowerBound, lower, delay.tau0),
        sampled(Condition::DelayUpperBound, upper, delay.tau_bar),
        sampled(Condition::DelaySlope, slope, delay.d),
        strict(Condition::DelaySlopeBelowOne, 1.0 - delay.d),
        AssumptionCheck {
            condition: Condition::DelayCurvature,
            statement: format!("{} (sampled sup |tau''| = {curvature})", Condition::DelayCurvature.statement()),
            margin: None,
            at_t: None,
            pass: curvature.is_finite(),
        },
        strict(Condition::DampingFloorPositive, weights.delta0),
        sampled(Condition::DampingFloor, floor, weights.delta0),
        sampled(Condition::DampingNonIncreasing, monotone, 0.0),
        sampled(Condition::DampingLogRate, log_rate, weights.m1),
        ratio_check,
        sampled(Condition::DelayedGainRate, rate, weights.m2),
    ];
    let pass = checks.iter().all(|c| c.pass);
    Ok(AssumptionReport {
        horizon,
        samples,
        checks,
        pass,
    })
}
