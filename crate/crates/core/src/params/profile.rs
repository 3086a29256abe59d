//! Time profiles of the delay `tau(t)` and of the two feedback weights.
//!
//! Every built-in family has closed-form derivatives, so the bounds it
//! reports (`tau0`, `tau_bar`, `d`, `delta0`, `beta0`, `M1`, `M2`) are exact.
//! A scenario may still declare its own bounds; those are what the
//! assumption checks and the certificate consume.

use serde::{Deserialize, Serialize};

use super::table::Table;

/// Upper bound on the extra sample points contributed by one profile.
const MAX_CRITICAL_POINTS: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DelayShape {
    Constant {
        tau_s: f64,
    },
    /// `tau(t) = mean + amplitude * sin(omega * t)`.
    Sinusoid {
        mean_s: f64,
        amplitude_s: f64,
        omega_rad_per_s: f64,
    },
    Table(Table),
}

impl DelayShape {
    pub fn tau(&self, t: f64) -> f64 {
        match self {
            DelayShape::Constant { tau_s } => *tau_s,
            DelayShape::Sinusoid {
                mean_s,
                amplitude_s,
                omega_rad_per_s,
            } => mean_s + amplitude_s * (omega_rad_per_s * t).sin(),
            DelayShape::Table(table) => table.value(t),
        }
    }

    pub fn tau_prime(&self, t: f64) -> f64 {
        match self {
            DelayShape::Constant { .. } => 0.0,
            DelayShape::Sinusoid {
                amplitude_s,
                omega_rad_per_s,
                ..
            } => amplitude_s * omega_rad_per_s * (omega_rad_per_s * t).cos(),
            DelayShape::Table(table) => table.derivative(t),
        }
    }

    pub fn tau_second(&self, t: f64) -> f64 {
        match self {
            DelayShape::Constant { .. } => 0.0,
            DelayShape::Sinusoid {
                amplitude_s,
                omega_rad_per_s,
                ..
            } => -amplitude_s * omega_rad_per_s * omega_rad_per_s * (omega_rad_per_s * t).sin(),
            DelayShape::Table(table) => table.second_derivative(t),
        }
    }

    /// Exact `(tau0, tau_bar, d)` of the family.
    pub fn natural_bounds(&self) -> (f64, f64, f64) {
        match self {
            DelayShape::Constant { tau_s } => (*tau_s, *tau_s, 0.0),
            DelayShape::Sinusoid {
                mean_s,
                amplitude_s,
                omega_rad_per_s,
            } => {
                let a = amplitude_s.abs();
                (mean_s - a, mean_s + a, (amplitude_s * omega_rad_per_s).abs())
            }
            DelayShape::Table(table) => {
                let lo = table.values().iter().copied().fold(f64::INFINITY, f64::min);
                let hi = table.values().iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let d = table.slopes().iter().copied().fold(0.0, f64::max);
                (lo, hi, d)
            }
        }
    }

    fn critical_times(&self, horizon: f64) -> Vec<f64> {
        match self {
            DelayShape::Constant { .. } => Vec::new(),
            DelayShape::Sinusoid {
                omega_rad_per_s, ..
            } => quarter_period_points(*omega_rad_per_s, horizon),
            DelayShape::Table(table) => nodes_within(table, horizon),
        }
    }
}

/// `tau(t)` together with its certified bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayProfile {
    pub shape: DelayShape,
    pub tau0: f64,
    pub tau_bar: f64,
    /// Certified supremum of `tau'(t)`.
    pub d: f64,
}

impl DelayProfile {
    /// Uses the family's exact bounds.
    pub fn new(shape: DelayShape) -> Self {
        let (tau0, tau_bar, d) = shape.natural_bounds();
        Self {
            shape,
            tau0,
            tau_bar,
            d,
        }
    }

    pub fn constant(tau: f64) -> Self {
        Self::new(DelayShape::Constant { tau_s: tau })
    }

    pub fn sinusoid(mean: f64, amplitude: f64, omega: f64) -> Self {
        Self::new(DelayShape::Sinusoid {
            mean_s: mean,
            amplitude_s: amplitude,
            omega_rad_per_s: omega,
        })
    }

    /// Replaces the natural bounds with declared ones where given.
    pub fn with_declared(mut self, tau0: Option<f64>, tau_bar: Option<f64>, d: Option<f64>) -> Self {
        if let Some(v) = tau0 {
            self.tau0 = v;
        }
        if let Some(v) = tau_bar {
            self.tau_bar = v;
        }
        if let Some(v) = d {
            self.d = v;
        }
        self
    }

    pub fn tau(&self, t: f64) -> f64 {
        self.shape.tau(t)
    }

    pub fn tau_prime(&self, t: f64) -> f64 {
        self.shape.tau_prime(t)
    }

    pub fn tau_second(&self, t: f64) -> f64 {
        self.shape.tau_second(t)
    }

    pub(crate) fn critical_times(&self, horizon: f64) -> Vec<f64> {
        self.shape.critical_times(horizon)
    }
}

/// Instantaneous damping weight `delta1(t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DampingShape {
    Constant {
        value: f64,
    },
    /// `delta1(t) = floor + excess * exp(-rate * t)`.
    ExponentialToFloor {
        floor: f64,
        excess: f64,
        rate_per_s: f64,
    },
    Table(Table),
}

impl DampingShape {
    pub fn value(&self, t: f64) -> f64 {
        match self {
            DampingShape::Constant { value } => *value,
            DampingShape::ExponentialToFloor {
                floor,
                excess,
                rate_per_s,
            } => floor + excess * (-rate_per_s * t).exp(),
            DampingShape::Table(table) => table.value(t),
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        match self {
            DampingShape::Constant { .. } => 0.0,
            DampingShape::ExponentialToFloor {
                excess, rate_per_s, ..
            } => -excess * rate_per_s * (-rate_per_s * t).exp(),
            DampingShape::Table(table) => table.derivative(t),
        }
    }

    /// `inf delta1` over `t >= 0`.
    fn natural_floor(&self) -> f64 {
        match self {
            DampingShape::Constant { value } => *value,
            DampingShape::ExponentialToFloor { floor, excess, .. } => floor + excess.min(0.0),
            DampingShape::Table(table) => table.values().iter().copied().fold(f64::INFINITY, f64::min),
        }
    }

    /// `sup |delta1' / delta1|` over `t >= 0`.
    fn natural_log_rate(&self) -> f64 {
        match self {
            DampingShape::Constant { .. } => 0.0,
            DampingShape::ExponentialToFloor {
                floor,
                excess,
                rate_per_s,
            } => {
                // |c k e^{-kt} / (f + c e^{-kt})| is monotone in e^{-kt}; its
                // sup over t >= 0 is attained at t = 0 or in the limit (= 0).
                (excess * rate_per_s / (floor + excess)).abs()
            }
            DampingShape::Table(table) => table
                .values()
                .iter()
                .zip(table.slopes())
                .map(|(v, s)| (s / v).abs())
                .fold(0.0, f64::max),
        }
    }
}

/// Delayed feedback weight `delta2(t)`, not necessarily positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DelayGainShape {
    Constant {
        value: f64,
    },
    /// `delta2(t) = ratio * delta1(t) * cos(omega * t)`.
    Modulated {
        ratio: f64,
        omega_rad_per_s: f64,
    },
    Table(Table),
}

/// The pair `(delta1, delta2)` with the bounds `delta0`, `beta0`, `M1`, `M2`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightProfiles {
    pub delta1: DampingShape,
    pub delta2: DelayGainShape,
    pub delta0: f64,
    pub beta0: f64,
    pub m1: f64,
    pub m2: f64,
}

impl WeightProfiles {
    /// Uses the exact bounds of the two families.
    pub fn new(delta1: DampingShape, delta2: DelayGainShape) -> Self {
        let delta0 = delta1.natural_floor();
        let m1 = delta1.natural_log_rate();
        let mut weights = Self {
            delta1,
            delta2,
            delta0,
            beta0: 0.0,
            m1,
            m2: 0.0,
        };
        let (beta0, m2) = weights.natural_delay_bounds();
        weights.beta0 = beta0;
        weights.m2 = m2;
        weights
    }

    pub fn with_declared(
        mut self,
        delta0: Option<f64>,
        beta0: Option<f64>,
        m1: Option<f64>,
        m2: Option<f64>,
    ) -> Self {
        if let Some(v) = delta0 {
            self.delta0 = v;
        }
        if let Some(v) = beta0 {
            self.beta0 = v;
        }
        if let Some(v) = m1 {
            self.m1 = v;
        }
        if let Some(v) = m2 {
            self.m2 = v;
        }
        self
    }

    pub fn delta1(&self, t: f64) -> f64 {
        self.delta1.value(t)
    }

    pub fn delta1_prime(&self, t: f64) -> f64 {
        self.delta1.derivative(t)
    }

    pub fn delta2(&self, t: f64) -> f64 {
        match &self.delta2 {
            DelayGainShape::Constant { value } => *value,
            DelayGainShape::Modulated {
                ratio,
                omega_rad_per_s,
            } => ratio * self.delta1(t) * (omega_rad_per_s * t).cos(),
            DelayGainShape::Table(table) => table.value(t),
        }
    }

    pub fn delta2_prime(&self, t: f64) -> f64 {
        match &self.delta2 {
            DelayGainShape::Constant { .. } => 0.0,
            DelayGainShape::Modulated {
                ratio,
                omega_rad_per_s,
            } => {
                let (s, c) = (omega_rad_per_s * t).sin_cos();
                ratio * (self.delta1_prime(t) * c - self.delta1(t) * omega_rad_per_s * s)
            }
            DelayGainShape::Table(table) => table.derivative(t),
        }
    }

    fn natural_delay_bounds(&self) -> (f64, f64) {
        match &self.delta2 {
            DelayGainShape::Constant { value } => (value.abs() / self.delta0, 0.0),
            DelayGainShape::Modulated {
                ratio,
                omega_rad_per_s,
            } => (ratio.abs(), ratio.abs() * (self.m1 + omega_rad_per_s.abs())),
            DelayGainShape::Table(table) => table
                .times()
                .iter()
                .zip(table.values().iter().zip(table.slopes()))
                .fold((0.0, 0.0), |(b, m), (&t, (v, s))| {
                    let d1 = self.delta1(t);
                    (f64::max(b, (v / d1).abs()), f64::max(m, (s / d1).abs()))
                }),
        }
    }

    pub(crate) fn critical_times(&self, horizon: f64) -> Vec<f64> {
        let mut times = match &self.delta1 {
            DampingShape::Table(table) => nodes_within(table, horizon),
            _ => Vec::new(),
        };
        match &self.delta2 {
            DelayGainShape::Modulated {
                omega_rad_per_s, ..
            } => times.extend(quarter_period_points(*omega_rad_per_s, horizon)),
            DelayGainShape::Table(table) => times.extend(nodes_within(table, horizon)),
            DelayGainShape::Constant { .. } => {}
        }
        times
    }
}

fn quarter_period_points(omega: f64, horizon: f64) -> Vec<f64> {
    if omega == 0.0 || !omega.is_finite() {
        return Vec::new();
    }
    let step = std::f64::consts::FRAC_PI_2 / omega.abs();
    (0..MAX_CRITICAL_POINTS)
        .map(|k| k as f64 * step)
        .take_while(|&t| t <= horizon)
        .collect()
}

fn nodes_within(table: &Table, horizon: f64) -> Vec<f64> {
    table
        .times()
        .iter()
        .copied()
        .filter(|&t| (0.0..=horizon).contains(&t))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn finite_difference(f: impl Fn(f64) -> f64, t: f64) -> f64 {
        let h = 1e-6;
        (f(t + h) - f(t - h)) / (2.0 * h)
    }

    #[test]
    fn sinusoid_bounds_are_exact() {
        let delay = DelayProfile::sinusoid(0.5, 0.09, 2.0);
        assert!((delay.tau0 - 0.41).abs() < 1e-15);
        assert!((delay.tau_bar - 0.59).abs() < 1e-15);
        assert!((delay.d - 0.18).abs() < 1e-15);
        for &t in &[0.0, 0.3, 1.7] {
            let fd = finite_difference(|s| delay.tau(s), t);
            assert!((fd - delay.tau_prime(t)).abs() < 1e-8);
            let fd2 = finite_difference(|s| delay.tau_prime(s), t);
            assert!((fd2 - delay.tau_second(t)).abs() < 1e-7);
        }
    }

    #[test]
    fn weight_derivatives_match_finite_differences() {
        let w = WeightProfiles::new(
            DampingShape::ExponentialToFloor {
                floor: 1.0,
                excess: 0.5,
                rate_per_s: 0.5,
            },
            DelayGainShape::Modulated {
                ratio: 0.3,
                omega_rad_per_s: 2.0,
            },
        );
        for &t in &[0.0, 0.4, 3.0] {
            assert!((finite_difference(|s| w.delta1(s), t) - w.delta1_prime(t)).abs() < 1e-8);
            assert!((finite_difference(|s| w.delta2(s), t) - w.delta2_prime(t)).abs() < 1e-8);
        }
        assert_eq!(w.delta0, 1.0);
        assert!((w.m1 - 0.25 / 1.5).abs() < 1e-15);
        assert_eq!(w.beta0, 0.3);
        assert!((w.m2 - 0.3 * (0.25 / 1.5 + 2.0)).abs() < 1e-15);
    }

    #[test]
    fn declared_bounds_override() {
        let d = DelayProfile::constant(0.5).with_declared(Some(0.4), Some(0.6), None);
        assert_eq!((d.tau0, d.tau_bar, d.d), (0.4, 0.6, 0.0));
    }
}
