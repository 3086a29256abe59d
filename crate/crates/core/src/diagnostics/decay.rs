use serde::{Deserialize, Serialize};

use super::DiagnosticsError;

pub const DEFAULT_WINDOW_FRACTION: f64 = 0.5;
pub const MIN_FIT_SAMPLES: usize = 10;

/// Least-squares fit `ln E(t) ≈ ln(H1 E(0)) - H2 t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    #[serde(rename = "H1")]
    pub h1: f64,
    #[serde(rename = "H2")]
    pub h2: f64,
    pub r_squared: f64,
    pub window: [f64; 2],
    pub samples: usize,
}

/// Fits over the trailing `window_fraction` of the sampled time span.
/// `series` is `(t, E)` in increasing `t`; `E(0)` is its first entry.
pub fn fit_decay_rate(series: &[(f64, f64)], window_fraction: f64) -> Result<DecayFit, DiagnosticsError> {
    let insufficient = |found| DiagnosticsError::InsufficientData {
        found,
        needed: MIN_FIT_SAMPLES,
    };
    let (Some(&(t_first, e0)), Some(&(t_last, _))) = (series.first(), series.last()) else {
        return Err(insufficient(0));
    };
    let fraction = window_fraction.clamp(0.0, 1.0);
    let t_lo = t_last - fraction * (t_last - t_first);
    let points: Vec<(f64, f64)> = series
        .iter()
        .filter(|&&(t, e)| t >= t_lo && e > 0.0 && e.is_finite())
        .map(|&(t, e)| (t, e.ln()))
        .collect();
    if points.len() < MIN_FIT_SAMPLES || !(e0 > 0.0) {
        return Err(insufficient(points.len()));
    }

    let m = points.len() as f64;
    let t_mean = points.iter().map(|p| p.0).sum::<f64>() / m;
    let y_mean = points.iter().map(|p| p.1).sum::<f64>() / m;
    let stt: f64 = points.iter().map(|p| (p.0 - t_mean).powi(2)).sum();
    let sty: f64 = points.iter().map(|p| (p.0 - t_mean) * (p.1 - y_mean)).sum();
    let slope = if stt > 0.0 { sty / stt } else { 0.0 };
    let intercept = y_mean - slope * t_mean;
    let ss_res: f64 = points
        .iter()
        .map(|p| (p.1 - (intercept + slope * p.0)).powi(2))
        .sum();
    let ss_tot: f64 = points.iter().map(|p| (p.1 - y_mean).powi(2)).sum();
    // A constant series is fitted exactly by a flat line.
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Ok(DecayFit {
        h1: intercept.exp() / e0,
        h2: -slope,
        r_squared,
        window: [t_lo, t_last],
        samples: points.len(),
    })
}
