//! Energy and Lyapunov functionals, and the inequality checks built on them.

mod decay;
mod dissipation;
mod energy;
mod lyapunov;

use thiserror::Error;

use crate::solver::SolverError;

pub use decay::{fit_decay_rate, DecayFit, DEFAULT_WINDOW_FRACTION, MIN_FIT_SAMPLES};
pub use dissipation::{
    energy_dissipation_check, lyapunov_decrease_check, numerical_tolerance, DissipationReport,
    C_TOL,
};
pub use energy::{energy, energy_from_parts, EnergyReport};
pub use lyapunov::{
    lyapunov_equivalence, lyapunov_k1, lyapunov_k2, lyapunov_k3, proof_inequalities,
    select_multipliers, Equivalence, MultiplierConstants, Multipliers, ProofInequalities,
    MAX_DOUBLINGS,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiagnosticsError {
    #[error("multiplier search for {which} found nothing after {MAX_DOUBLINGS} doublings")]
    MultiplierSearch { which: &'static str },
    #[error("invalid constant {name} = {value}")]
    InvalidConstant { name: &'static str, value: f64 },
    #[error("energy vanishes on the whole trajectory; L/E is undefined")]
    UndefinedRatio,
    #[error("decay fit needs at least {needed} samples with E > 0 in the window, found {found}")]
    InsufficientData { found: usize, needed: usize },
    #[error(transparent)]
    Solver(#[from] SolverError),
}
