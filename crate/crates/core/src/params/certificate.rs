//! Admissible `(xi_bar, lambda)` and the dissipation constants `C1, C2, C3`.

use serde::{Deserialize, Serialize};

use super::{AssumptionReport, BeamParams, DelayProfile, ParamsError, WeightProfiles};

/// Kernel rate used when `beta0 = 0` leaves `lambda` unbounded.
pub const DEFAULT_LAMBDA_MAX: f64 = 10.0;

fn feasibility(beta0: f64, d: f64) -> Result<f64, ParamsError> {
    if !(beta0.is_finite() && beta0 >= 0.0) {
        return Err(ParamsError::invalid("beta0", beta0, "must be finite and >= 0"));
    }
    if !(d.is_finite() && d < 1.0) {
        return Err(ParamsError::invalid("d", d, "must be finite and < 1"));
    }
    let bound = (1.0 - d).sqrt();
    if beta0 >= bound {
        return Err(ParamsError::Infeasible { beta0, bound });
    }
    Ok(bound)
}

/// Weight of the delay energy. The admissible interval
/// `(beta0/sqrt(1-d), 2 - beta0/sqrt(1-d))` is symmetric about 1.
pub fn select_xi_bar(beta0: f64, d: f64) -> Result<f64, ParamsError> {
    feasibility(beta0, d)?;
    Ok(1.0)
}

/// Half the largest rate keeping `C2 > 0`, or `lambda_max` when `beta0 = 0`.
pub fn select_lambda(
    xi_bar: f64,
    beta0: f64,
    d: f64,
    tau_bar: f64,
    lambda_max: f64,
) -> Result<f64, ParamsError> {
    let bound = feasibility(beta0, d)?;
    if !(tau_bar.is_finite() && tau_bar > 0.0) {
        return Err(ParamsError::invalid("tau_bar", tau_bar, "must be finite and > 0"));
    }
    if beta0 == 0.0 {
        return Ok(lambda_max);
    }
    let ratio = xi_bar * bound / beta0;
    if !(ratio > 1.0) {
        return Err(ParamsError::Infeasible {
            beta0,
            bound: xi_bar * bound,
        });
    }
    Ok(0.5 * ratio.ln() / tau_bar)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DissipationConstants {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

impl DissipationConstants {
    pub fn min(&self) -> f64 {
        self.c1.min(self.c2).min(self.c3)
    }

    pub fn all_positive(&self) -> bool {
        self.c1 > 0.0 && self.c2 > 0.0 && self.c3 > 0.0
    }
}

pub fn dissipation_constants(
    delta0: f64,
    beta0: f64,
    d: f64,
    xi_bar: f64,
    lambda: f64,
    tau_bar: f64,
) -> DissipationConstants {
    let share = beta0 / (2.0 * (1.0 - d).sqrt());
    DissipationConstants {
        c1: delta0 * (1.0 - share - 0.5 * xi_bar),
        c2: delta0 * (1.0 - d) * ((-lambda * tau_bar).exp() * 0.5 * xi_bar - share),
        c3: 0.5 * lambda * xi_bar * delta0,
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CertificateOverrides {
    pub xi_bar: Option<f64>,
    pub lambda: Option<f64>,
    pub lambda_max: Option<f64>,
}

/// A failed ingredient of the certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub id: String,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityCertificate {
    pub xi_bar: f64,
    pub lambda: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    /// `min(C1, C2, C3)`.
    pub c: f64,
    pub valid: bool,
    pub violations: Vec<Violation>,
}

impl StabilityCertificate {
    pub fn constants(&self) -> DissipationConstants {
        DissipationConstants {
            c1: self.c1,
            c2: self.c2,
            c3: self.c3,
        }
    }

    pub fn violation_ids(&self) -> Vec<&str> {
        self.violations.iter().map(|v| v.id.as_str()).collect()
    }
}

/// Assembles the certificate from declared bounds and a sampled assumption
/// report. Infeasible bounds produce an invalid certificate rather than an
/// error, so sweeps can record them.
pub fn build_certificate(
    params: &BeamParams,
    delay: &DelayProfile,
    weights: &WeightProfiles,
    overrides: &CertificateOverrides,
    report: &AssumptionReport,
) -> Result<StabilityCertificate, ParamsError> {
    params.validate()?;
    let mut violations: Vec<Violation> = report
        .failed()
        .map(|c| Violation {
            id: c.condition.id().to_string(),
            detail: match c.margin {
                Some(m) => format!("{} (margin {m:e})", c.statement),
                None => c.statement.clone(),
            },
        })
        .collect();

    let (beta0, d, tau_bar) = (weights.beta0, delay.d, delay.tau_bar);
    let lambda_max = overrides.lambda_max.unwrap_or(DEFAULT_LAMBDA_MAX);
    let feasible = feasibility(beta0, d);
    if let Err(e) = &feasible {
        if !violations.iter().any(|v| v.id == "delayed-gain-ratio") {
            violations.push(Violation {
                id: "delayed-gain-ratio".into(),
                detail: e.to_string(),
            });
        }
    }

    let xi_bar = match (overrides.xi_bar, &feasible) {
        (Some(x), _) => x,
        (None, _) => select_xi_bar(beta0, d).unwrap_or(1.0),
    };
    let lambda = match overrides.lambda {
        Some(l) => l,
        None => select_lambda(xi_bar, beta0, d, tau_bar, lambda_max).unwrap_or(0.0),
    };

    if let Ok(bound) = feasible {
        let edge = beta0 / bound;
        if !(xi_bar > edge && xi_bar < 2.0 - edge) {
            violations.push(Violation {
                id: "xi-bar-interval".into(),
                detail: format!("xi_bar = {xi_bar} outside ({edge}, {})", 2.0 - edge),
            });
        }
    }
    if !(lambda.is_finite() && lambda > 0.0) {
        violations.push(Violation {
            id: "lambda-positive".into(),
            detail: format!("lambda = {lambda} must be finite and > 0"),
        });
    }

    let constants = dissipation_constants(weights.delta0, beta0, d, xi_bar, lambda, tau_bar);
    for (id, value) in [
        ("c1-positive", constants.c1),
        ("c2-positive", constants.c2),
        ("c3-positive", constants.c3),
    ] {
        if !(value > 0.0) {
            violations.push(Violation {
                id: id.into(),
                detail: format!("{} = {value:e}", &id[..2]),
            });
        }
    }

    Ok(StabilityCertificate {
        xi_bar,
        lambda,
        c1: constants.c1,
        c2: constants.c2,
        c3: constants.c3,
        c: constants.min(),
        valid: violations.is_empty(),
        violations,
    })
}
