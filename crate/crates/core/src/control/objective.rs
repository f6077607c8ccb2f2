use serde::{Deserialize, Serialize};

use super::config::ControlConfig;
use crate::error::{input_err, Result};
use crate::forecast::Envelope;
use crate::plant::{rk4_step, PlantParams, GRAMS_TO_KG};

/// How the disturbance sequence seen by the controller is chosen.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum DisturbanceMode {
    /// Upper edge of the forecast envelope. Higher inflow cools the tank, so
    /// this is the worst case whenever the tank is warmer than the inlet.
    RobustUpper,
    /// The true future flow, g/s.
    Perfect { trace: Vec<f64> },
    /// A fixed interval; its upper end is used at every step.
    FixedRange { lo: f64, hi: f64 },
}

/// Disturbance sequence (g/s, non-negative) used by the optimizer.
pub fn worst_case_sequence(envelope: &Envelope, mode: &DisturbanceMode) -> Result<Vec<f64>> {
    let seq = match mode {
        DisturbanceMode::RobustUpper => envelope.upper.clone(),
        DisturbanceMode::Perfect { trace } => {
            if trace.len() != envelope.len() {
                return input_err(format!(
                    "perfect trace has {} steps, horizon has {}",
                    trace.len(),
                    envelope.len()
                ));
            }
            trace.clone()
        }
        DisturbanceMode::FixedRange { lo, hi } => {
            if !(lo <= hi) {
                return input_err(format!("fixed range needs lo <= hi, got [{lo}, {hi}]"));
            }
            vec![*hi; envelope.len()]
        }
    };
    if seq.iter().any(|v| !v.is_finite()) {
        return input_err("disturbance sequence contains non-finite values");
    }
    Ok(seq.into_iter().map(|v| v.max(0.0)).collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct ObjectiveValue {
    pub j_total: f64,
    /// Economic part, `Σ r·uᵢ²`.
    pub j_ec: f64,
    /// Constraint-violation part with the slacks at their optimal values.
    pub j_cv: f64,
    /// Temperature after each step, °C.
    pub predicted_t: Vec<f64>,
}

/// Violation cost of one predicted temperature: the smallest weighted slack
/// that makes the soft bounds hold.
pub fn violation_cost(temp: f64, config: &ControlConfig) -> f64 {
    let mut c = config.eta_lower * (config.x_min - temp).max(0.0);
    if let Some(x_max) = config.x_max {
        c += config.eta_upper * (temp - x_max).max(0.0);
    }
    c
}

/// Rolls the plant model over the horizon and scores the input sequence.
///
/// `mdot_gps` is in g/s. The violation term of step `i` is charged on the
/// temperature reached at the end of that step.
pub fn evaluate_objective(
    u_seq: &[f64],
    mdot_gps: &[f64],
    t0: f64,
    params: &PlantParams,
    config: &ControlConfig,
) -> Result<ObjectiveValue> {
    if u_seq.len() != mdot_gps.len() {
        return input_err(format!(
            "input sequence has {} steps, disturbance has {}",
            u_seq.len(),
            mdot_gps.len()
        ));
    }
    let mut temp = t0;
    let mut predicted_t = Vec::with_capacity(u_seq.len());
    let (mut j_ec, mut j_cv) = (0.0, 0.0);
    for (&u, &m) in u_seq.iter().zip(mdot_gps) {
        temp = rk4_step(params, temp, u, m * GRAMS_TO_KG, config.h);
        j_ec += config.input_weight * u * u;
        j_cv += violation_cost(temp, config);
        predicted_t.push(temp);
    }
    Ok(ObjectiveValue {
        j_total: j_ec + j_cv,
        j_ec,
        j_cv,
        predicted_t,
    })
}
