//! Simulation and verification of a piezoelectric beam with interior
//! time-varying delay.

pub mod diagnostics;
pub mod params;
pub mod scenario;
pub mod solver;
pub mod sweep;

pub use scenario::{Scenario, ScenarioError};
