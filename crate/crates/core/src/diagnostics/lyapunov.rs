//! Perturbed functional `L = N E + N1 K1 + N2 K2 + N3 K3`.

use serde::{Deserialize, Serialize};

use super::DiagnosticsError;
use crate::params::{BeamParams, StabilityCertificate};
use crate::solver::{Grid, SimState};

/// Search limit when doubling a multiplier from 1.
pub const MAX_DOUBLINGS: u32 = 64;

/// `ρ∫v_t v + γμ∫p_t v`.
pub fn lyapunov_k1(state: &SimState, grid: &Grid, params: &BeamParams) -> f64 {
    params.rho * grid.inner(&state.vt, &state.v)
        + params.gamma * params.mu * grid.inner(&state.pt, &state.v)
}

/// `ρ∫v_t (γv - p) + γμ∫p_t (γv - p)`.
pub fn lyapunov_k2(state: &SimState, grid: &Grid, params: &BeamParams) -> f64 {
    let g = params.gamma;
    let w: Vec<f64> = state.v.iter().zip(&state.p).map(|(v, p)| g * v - p).collect();
    params.rho * grid.inner(&state.vt, &w) + g * params.mu * grid.inner(&state.pt, &w)
}

/// `ρ∫v_t v + μ∫p_t p`.
pub fn lyapunov_k3(state: &SimState, grid: &Grid, params: &BeamParams) -> f64 {
    params.rho * grid.inner(&state.vt, &state.v) + params.mu * grid.inner(&state.pt, &state.p)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Multipliers {
    #[serde(rename = "N")]
    pub n: f64,
    #[serde(rename = "N1")]
    pub n1: f64,
    #[serde(rename = "N2")]
    pub n2: f64,
    #[serde(rename = "N3")]
    pub n3: f64,
}

impl Multipliers {
    pub fn functional(&self, energy: f64, k1: f64, k2: f64, k3: f64) -> f64 {
        self.n * energy + self.n1 * k1 + self.n2 * k2 + self.n3 * k3
    }

    pub fn sum(&self) -> f64 {
        self.n + self.n1 + self.n2 + self.n3
    }
}

/// Free constants of the derivative estimates. `None` selects the default.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MultiplierConstants {
    /// Poincaré constant; defaults to `(2L/π)^2`.
    pub c_prime: Option<f64>,
    /// `ε1..ε4`; each defaults to `c' δ1(0) / α1`.
    pub eps: [Option<f64>; 4],
    /// Defaults to `γμ / (4ρ)`.
    pub eta1: Option<f64>,
    /// Defaults to `1 / (4γ)`.
    pub eta2: Option<f64>,
}

/// Resolved constants at fixed `(N2)`; `ε`, `η3`, `η4`, `η5` depend on the
/// multipliers themselves.
#[derive(Debug, Clone, Copy)]
struct Resolved {
    c_prime: f64,
    eps: [f64; 4],
    eta1: f64,
    eta2: f64,
}

/// Left-hand sides of the five coefficient inequalities; each must exceed 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProofInequalities {
    pub coupling: f64,
    pub pt: f64,
    pub vx: f64,
    pub vt: f64,
    pub delayed: f64,
}

impl ProofInequalities {
    pub fn all_hold(&self) -> bool {
        [self.coupling, self.pt, self.vx, self.vt, self.delayed]
            .iter()
            .all(|&v| v > 1.0)
    }
}

struct Problem {
    rho: f64,
    mu: f64,
    gamma: f64,
    beta: f64,
    alpha1: f64,
    d10: f64,
    beta0: f64,
    c: f64,
    k: Resolved,
}

fn check(name: &'static str, value: f64) -> Result<f64, DiagnosticsError> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(DiagnosticsError::InvalidConstant { name, value })
    }
}

impl Problem {
    fn new(
        params: &BeamParams,
        delta1_0: f64,
        beta0: f64,
        certificate: &StabilityCertificate,
        constants: &MultiplierConstants,
    ) -> Result<Self, DiagnosticsError> {
        let c_prime = check(
            "c_prime",
            constants.c_prime.unwrap_or_else(|| params.poincare_constant()),
        )?;
        check("gamma", params.gamma)?;
        let d10 = check("delta1(0)", delta1_0)?;
        let alpha1 = params.alpha1();
        let default_eps = c_prime * d10 / alpha1;
        let names = ["eps1", "eps2", "eps3", "eps4"];
        let mut eps = [0.0; 4];
        for (i, e) in eps.iter_mut().enumerate() {
            *e = check(names[i], constants.eps[i].unwrap_or(default_eps))?;
        }
        let eta1 = check(
            "eta1",
            constants
                .eta1
                .unwrap_or(params.gamma * params.mu / (4.0 * params.rho)),
        )?;
        let eta2 = check("eta2", constants.eta2.unwrap_or(1.0 / (4.0 * params.gamma)))?;
        Ok(Self {
            rho: params.rho,
            mu: params.mu,
            gamma: params.gamma,
            beta: params.beta,
            alpha1,
            d10,
            beta0: beta0.max(0.0),
            c: certificate.c,
            k: Resolved {
                c_prime,
                eps,
                eta1,
                eta2,
            },
        })
    }

    /// Evaluates all five inequalities with `ε = N1` and the `η3..η5` that
    /// cancel the `|γv_x - p_x|^2` couplings.
    fn evaluate(&self, m: &Multipliers) -> ProofInequalities {
        let Resolved {
            c_prime: cp,
            eps,
            eta1,
            eta2,
        } = self.k;
        let (rho, mu, g, a1, d10, b0) = (self.rho, self.mu, self.gamma, self.alpha1, self.d10, self.beta0);
        let eps_free = m.n1;
        let eta5 = 1.0 / (m.n2 * a1);
        let eta3 = 1.0 / (m.n2 * cp * d10);
        // With beta0 = 0 the eta4 terms carry a zero factor.
        let (eta4_coupling, eta4_delayed) = if b0 > 0.0 {
            let eta4 = 1.0 / (m.n2 * cp * b0 * d10);
            (cp * b0 * d10 * eta4, b0 * d10 / (4.0 * eta4))
        } else {
            (0.0, 0.0)
        };

        let coupling = m.n3 * self.beta - m.n2 * (a1 * eta5 + cp * d10 * eta3 + eta4_coupling);
        let pt = m.n2 * g * mu / 2.0 - m.n1 * g * mu / (4.0 * eps_free) - m.n3 * mu;
        let vx = m.n1 * (a1 - cp * d10 / (4.0 * eps[0]) - cp * b0 * d10 / (4.0 * eps[1]))
            - m.n2 * a1 / (4.0 * eta5)
            + m.n3 * (a1 - cp * d10 / (4.0 * eps[2]) - cp * b0 * d10 / (4.0 * eps[3]));
        let vt = self.c * m.n
            - m.n1 * (rho + eps_free * g * mu + eps[0] * d10)
            - m.n2 * (rho * g + rho / (4.0 * eta1) + g * g * mu / (4.0 * eta2) + d10 / (4.0 * eta3))
            - m.n3 * (rho + eps[2] * d10);
        let delayed = self.c * m.n
            - m.n1 * eps[1] * b0 * d10
            - m.n2 * eta4_delayed
            - m.n3 * eps[3] * b0 * d10;
        ProofInequalities {
            coupling,
            pt,
            vx,
            vt,
            delayed,
        }
    }
}

fn double_until(
    which: &'static str,
    mut holds: impl FnMut(f64) -> bool,
) -> Result<f64, DiagnosticsError> {
    let mut x = 1.0;
    for _ in 0..=MAX_DOUBLINGS {
        if holds(x) {
            return Ok(x);
        }
        x *= 2.0;
    }
    Err(DiagnosticsError::MultiplierSearch { which })
}

/// Chooses `N3`, then `N2`, then `N1`, then `N`, each the first power of two
/// making its inequality exceed 1.
pub fn select_multipliers(
    params: &BeamParams,
    delta1_0: f64,
    beta0: f64,
    certificate: &StabilityCertificate,
    constants: &MultiplierConstants,
) -> Result<Multipliers, DiagnosticsError> {
    let problem = Problem::new(params, delta1_0, beta0, certificate, constants)?;
    check("C", certificate.c)?;
    let mut m = Multipliers {
        n: 1.0,
        n1: 1.0,
        n2: 1.0,
        n3: 1.0,
    };
    m.n3 = double_until("N3", |x| problem.evaluate(&Multipliers { n3: x, ..m }).coupling > 1.0)?;
    m.n2 = double_until("N2", |x| problem.evaluate(&Multipliers { n2: x, ..m }).pt > 1.0)?;
    m.n1 = double_until("N1", |x| problem.evaluate(&Multipliers { n1: x, ..m }).vx > 1.0)?;
    m.n = double_until("N", |x| {
        let ineq = problem.evaluate(&Multipliers { n: x, ..m });
        ineq.vt > 1.0 && ineq.delayed > 1.0
    })?;
    Ok(m)
}

/// Substitutes `m` into the five inequalities.
pub fn proof_inequalities(
    params: &BeamParams,
    delta1_0: f64,
    beta0: f64,
    certificate: &StabilityCertificate,
    constants: &MultiplierConstants,
    m: &Multipliers,
) -> Result<ProofInequalities, DiagnosticsError> {
    Ok(Problem::new(params, delta1_0, beta0, certificate, constants)?.evaluate(m))
}

/// Empirical bounds `b1 E <= L <= b2 E`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Equivalence {
    pub b1: f64,
    pub b2: f64,
    /// `b1 > 0`.
    pub pass: bool,
}

/// `min` and `max` of `L/E` over samples with `E > 0`.
pub fn lyapunov_equivalence(
    samples: impl IntoIterator<Item = (f64, f64)>,
) -> Result<Equivalence, DiagnosticsError> {
    let mut b1 = f64::INFINITY;
    let mut b2 = f64::NEG_INFINITY;
    for (energy, functional) in samples {
        if energy > 0.0 {
            let r = functional / energy;
            b1 = b1.min(r);
            b2 = b2.max(r);
        }
    }
    if !b1.is_finite() {
        return Err(DiagnosticsError::UndefinedRatio);
    }
    Ok(Equivalence {
        b1,
        b2,
        pass: b1 > 0.0,
    })
}
