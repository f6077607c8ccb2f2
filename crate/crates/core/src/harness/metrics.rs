use serde::{Deserialize, Serialize};

use crate::control::ControlConfig;
use crate::forecast::Method;

/// One row of the closed-loop log, describing the interval that ends at `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct StepRecord {
    /// End of the control interval, s.
    pub t: f64,
    /// True tank temperature at `t`, °C.
    pub temperature: f64,
    /// Heater power applied over the interval, kW.
    pub u: f64,
    /// True and measured inlet flow at `t`, g/s.
    pub mdot_true: f64,
    pub mdot_meas: f64,
    /// One-step-ahead envelope the controller used for `t`, g/s.
    pub env_lo: f64,
    pub env_hi: f64,
    /// Forecaster chosen by the hybrid controllers.
    pub switch: Option<Method>,
    /// Realized objective of the interval.
    pub j_step: f64,
    /// Forecast plus solve wall time, ms (0 unless timing is recorded).
    pub solve_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub avg_objective: f64,
    /// Time integral of the lower-bound violation, °C·s.
    pub violation_degree_seconds: f64,
    /// Heater energy, kJ.
    pub total_heater_energy: f64,
    /// Fraction of hybrid decisions that fell back to the auto-regressive
    /// forecaster; zero for other controllers.
    #[serde(rename = "switch_fraction_NAR")]
    pub switch_fraction_nar: f64,
    /// Largest shortfall below the lower bound, °C.
    pub peak_violation: f64,
}

impl Metrics {
    pub const FIELDS: [&'static str; 5] = [
        "avg_objective",
        "violation_degree_seconds",
        "total_heater_energy",
        "switch_fraction_NAR",
        "peak_violation",
    ];

    pub fn values(&self) -> [f64; 5] {
        [
            self.avg_objective,
            self.violation_degree_seconds,
            self.total_heater_energy,
            self.switch_fraction_nar,
            self.peak_violation,
        ]
    }
}

/// Realized objective of one interval: the economic cost of the applied
/// input plus the weighted violation at the interval's end, held for `h`.
pub fn realized_step_objective(u: f64, temperature: f64, control: &ControlConfig) -> f64 {
    control.input_weight * u * u + crate::control::violation_cost(temperature, control) * control.h
}

/// Summarizes a log. Only the columns written to `run.csv` are used, so the
/// result can be recomputed from that file.
pub fn compute_metrics(rows: &[StepRecord], control: &ControlConfig) -> Metrics {
    let h = control.h;
    let n = rows.len().max(1) as f64;
    let shortfall = |r: &StepRecord| (control.x_min - r.temperature).max(0.0);
    let decisions = rows.iter().filter(|r| r.switch.is_some()).count();
    let nar = rows.iter().filter(|r| r.switch == Some(Method::Nar)).count();
    Metrics {
        avg_objective: rows.iter().map(|r| r.j_step).sum::<f64>() / n,
        violation_degree_seconds: rows.iter().map(|r| shortfall(r) * h).sum(),
        total_heater_energy: rows.iter().map(|r| r.u * h).sum(),
        switch_fraction_nar: if decisions == 0 { 0.0 } else { nar as f64 / decisions as f64 },
        peak_violation: rows.iter().map(shortfall).fold(0.0, f64::max),
    }
}
