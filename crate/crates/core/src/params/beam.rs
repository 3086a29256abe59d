use serde::{Deserialize, Serialize};

use super::ParamsError;

/// Material constants of the beam.
///
/// `alpha` is the full elastic stiffness; the energy only stays positive when
/// the piezoelectric share `gamma^2 * beta` is strictly smaller than it, which
/// is what [`BeamParams::alpha1`] measures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamParams {
    pub rho: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub mu: f64,
    pub beta: f64,
    #[serde(rename = "length_m")]
    pub length: f64,
}

impl BeamParams {
    pub fn new(
        rho: f64,
        alpha: f64,
        gamma: f64,
        mu: f64,
        beta: f64,
        length: f64,
    ) -> Result<Self, ParamsError> {
        let params = Self {
            rho,
            alpha,
            gamma,
            mu,
            beta,
            length,
        };
        params.validate()?;
        Ok(params)
    }

    /// Residual stiffness `alpha - gamma^2 * beta`.
    pub fn alpha1(&self) -> f64 {
        self.alpha - self.gamma * self.gamma * self.beta
    }

    pub fn validate(&self) -> Result<(), ParamsError> {
        // gamma = 0 is the decoupled limit, kept for verification runs.
        if !(self.gamma.is_finite() && self.gamma >= 0.0) {
            return Err(ParamsError::invalid("gamma", self.gamma, "must be finite and >= 0"));
        }
        for (name, value) in [
            ("rho", self.rho),
            ("alpha", self.alpha),
            ("mu", self.mu),
            ("beta", self.beta),
            ("length", self.length),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(ParamsError::invalid(name, value, "must be finite and > 0"));
            }
        }
        let alpha1 = self.alpha1();
        if !(alpha1 > 0.0) {
            return Err(ParamsError::invalid(
                "alpha1",
                alpha1,
                "alpha - gamma^2 * beta must be > 0",
            ));
        }
        Ok(())
    }

    /// Coefficients of the second-difference block, rows (v, p):
    /// `[[alpha/rho, -gamma*beta/rho], [-gamma*beta/mu, beta/mu]]`.
    pub fn wave_matrix(&self) -> [[f64; 2]; 2] {
        let gb = self.gamma * self.beta;
        [
            [self.alpha / self.rho, -gb / self.rho],
            [-gb / self.mu, self.beta / self.mu],
        ]
    }

    /// Symmetric stiffness `[[alpha, -gamma*beta], [-gamma*beta, beta]]` of the
    /// potential energy written in gradients.
    pub fn stiffness(&self) -> [[f64; 2]; 2] {
        let gb = self.gamma * self.beta;
        [[self.alpha, -gb], [-gb, self.beta]]
    }

    /// Largest characteristic speed of the coupled system.
    pub fn max_wave_speed(&self) -> f64 {
        let [[a, b], [c, d]] = self.wave_matrix();
        let trace = a + d;
        let det = a * d - b * c;
        let disc = (trace * trace - 4.0 * det).max(0.0);
        (0.5 * (trace + disc.sqrt())).sqrt()
    }

    /// Best Poincare constant on `(0, L)` for fields clamped at `x = 0`.
    pub fn poincare_constant(&self) -> f64 {
        let s = 2.0 * self.length / std::f64::consts::PI;
        s * s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha1_must_be_positive() {
        assert!(BeamParams::new(1.0, 1.0, 1.0, 1.0, 1.0, 1.0).is_err());
        let p = BeamParams::new(1.0, 2.0, 1.0, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(p.alpha1(), 1.0);
    }

    #[test]
    fn rejects_non_positive_fields() {
        assert!(BeamParams::new(0.0, 2.0, 0.5, 1.0, 1.0, 1.0).is_err());
        assert!(BeamParams::new(1.0, 2.0, 0.5, 1.0, 1.0, f64::NAN).is_err());
    }

    #[test]
    fn wave_speed_of_coupled_block() {
        // M = [[2,-1],[-1,1]] has eigenvalues (3 +- sqrt 5)/2; compare with a
        // brute-force scan of the characteristic polynomial.
        let p = BeamParams::new(1.0, 2.0, 1.0, 1.0, 1.0, 1.0).unwrap();
        let charpoly = |l: f64| (2.0 - l) * (1.0 - l) - 1.0;
        let mut root = 0.0;
        let mut prev = charpoly(1.0);
        let steps = 2_000_000;
        for k in 1..=steps {
            let l = 1.0 + 3.0 * k as f64 / steps as f64;
            let val = charpoly(l);
            if prev.signum() != val.signum() {
                root = l;
                break;
            }
            prev = val;
        }
        assert!((p.max_wave_speed() - root.sqrt()).abs() < 1e-6);
        assert!((p.max_wave_speed() - 1.618_033_988_749_895).abs() < 1e-12);
    }

    #[test]
    fn decoupled_unit_speeds() {
        let p = BeamParams::new(1.0, 1.0, 0.0, 1.0, 1.0, 1.0).unwrap();
        assert!((p.max_wave_speed() - 1.0).abs() < 1e-12);
    }
}
