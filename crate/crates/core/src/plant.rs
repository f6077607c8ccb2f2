//! Well-mixed tank with an electric heater and an inlet flow at a fixed
//! temperature; the outlet flow equals the inlet flow.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Grams per second to kilograms per second.
pub const GRAMS_TO_KG: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlantParams {
    /// Water mass, kg.
    pub mass: f64,
    /// Specific heat, kJ/(kg·K).
    pub cp: f64,
    /// Inlet water temperature, °C.
    pub t_inlet: f64,
    /// Ambient temperature, °C.
    pub t_amb: f64,
    /// Overall heat-loss coefficient, kW/K.
    pub u_total: f64,
}

impl Default for PlantParams {
    fn default() -> Self {
        Self {
            mass: 0.7854,
            cp: 6.9244,
            t_inlet: 20.0,
            t_amb: 15.0,
            u_total: 1e-7,
        }
    }
}

impl PlantParams {
    pub fn validate(&self) -> Result<()> {
        let ok = [self.mass, self.cp, self.t_inlet, self.t_amb, self.u_total]
            .iter()
            .all(|v| v.is_finite() && *v > 0.0);
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("plant parameters must be positive: {self:?}")))
        }
    }
}

/// `dT/dt` in K/s for heater power `q` (kW) and inlet flow `mdot` (kg/s).
pub fn temperature_derivative(p: &PlantParams, temp: f64, q: f64, mdot: f64) -> f64 {
    (q - mdot * p.cp * (temp - p.t_inlet) - p.u_total * (temp - p.t_amb)) / (p.mass * p.cp)
}

/// One classical fourth-order Runge–Kutta step of length `h` seconds with
/// `q` and `mdot` held over the step.
pub fn rk4_step(p: &PlantParams, temp: f64, q: f64, mdot: f64, h: f64) -> f64 {
    let f = |t: f64| temperature_derivative(p, t, q, mdot);
    let k1 = f(temp);
    let k2 = f(temp + 0.5 * h * k1);
    let k3 = f(temp + 0.5 * h * k2);
    let k4 = f(temp + h * k3);
    temp + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

/// Rolls the model forward: element `i` is the temperature after applying
/// `q[i]` and `mdot[i]` for one step. `mdot` is in kg/s.
pub fn simulate(p: &PlantParams, temp0: f64, q: &[f64], mdot: &[f64], h: f64) -> Vec<f64> {
    let mut t = temp0;
    q.iter()
        .zip(mdot)
        .map(|(&qi, &mi)| {
            t = rk4_step(p, t, qi, mi, h);
            t
        })
        .collect()
}
