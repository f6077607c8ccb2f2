use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ControlConfig {
    /// Prediction horizon in steps.
    pub np: usize,
    /// Control step, seconds.
    pub h: f64,
    /// Heater power bounds, kW.
    pub u_min: f64,
    pub u_max: f64,
    /// Soft lower temperature bound, °C.
    pub x_min: f64,
    /// Optional soft upper temperature bound, °C.
    pub x_max: Option<f64>,
    /// Per-step weight on lower-bound violation, per °C.
    pub eta_lower: f64,
    /// Per-step weight on upper-bound violation, per °C.
    pub eta_upper: f64,
    /// Weight on the squared heater power.
    pub input_weight: f64,
    /// Outer linearize-and-solve passes.
    pub max_iterations: usize,
    /// Relative objective decrease below which the outer loop stops.
    pub tolerance: f64,
    /// Interior-point iterations allowed per quadratic subproblem.
    pub qp_max_iterations: u32,
}

impl Default for ControlConfig {
    fn default() -> Self {
        Self {
            np: 25,
            h: 2.0,
            u_min: 0.0,
            u_max: 10.0,
            x_min: 55.0,
            x_max: None,
            eta_lower: 10.0,
            eta_upper: 0.0,
            input_weight: 1.0,
            max_iterations: 4,
            tolerance: 1e-9,
            qp_max_iterations: 100,
        }
    }
}

impl ControlConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.np == 0 {
            return bad("control horizon must be at least one step".into());
        }
        if !(self.h > 0.0 && self.h.is_finite()) {
            return bad(format!("control step must be positive, got {}", self.h));
        }
        if !(self.u_min < self.u_max) || !self.u_min.is_finite() || !self.u_max.is_finite() {
            return bad(format!("need u_min < u_max, got [{}, {}]", self.u_min, self.u_max));
        }
        if !self.x_min.is_finite() || self.x_max.is_some_and(|x| !(x > self.x_min)) {
            return bad(format!("invalid temperature bounds {} / {:?}", self.x_min, self.x_max));
        }
        if !(self.eta_lower >= 0.0 && self.eta_upper >= 0.0 && self.input_weight >= 0.0) {
            return bad("objective weights must be non-negative".into());
        }
        if self.max_iterations == 0 || self.qp_max_iterations == 0 {
            return bad("solver budget must allow at least one iteration".into());
        }
        Ok(())
    }

    /// Midpoint of the input bounds, the cold-start guess.
    pub fn u_mid(&self) -> f64 {
        0.5 * (self.u_min + self.u_max)
    }
}
