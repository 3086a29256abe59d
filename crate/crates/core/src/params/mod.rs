//! Physical constants, time profiles and the stability certificate.

mod assumptions;
mod beam;
mod certificate;
mod profile;
mod table;

use thiserror::Error;

pub use assumptions::{
    validate_assumptions, AssumptionCheck, AssumptionReport, Condition, DEFAULT_SAMPLES,
};
pub use beam::BeamParams;
pub use certificate::{
    build_certificate, dissipation_constants, select_lambda, select_xi_bar, CertificateOverrides,
    DissipationConstants, StabilityCertificate, Violation, DEFAULT_LAMBDA_MAX,
};
pub use profile::{DampingShape, DelayGainShape, DelayProfile, DelayShape, WeightProfiles};
pub use table::{Table, TableData};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamsError {
    #[error("invalid {name} = {value}: {reason}")]
    Invalid {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("invalid table: {0}")]
    Table(String),
    #[error("{profile} is not finite at t = {t}")]
    Evaluation { profile: &'static str, t: f64 },
    #[error("infeasible certificate: beta0 = {beta0} must be below sqrt(1 - d) = {bound}")]
    Infeasible { beta0: f64, bound: f64 },
}

impl ParamsError {
    pub(crate) fn invalid(name: &'static str, value: f64, reason: &'static str) -> Self {
        ParamsError::Invalid {
            name,
            value,
            reason,
        }
    }
}
