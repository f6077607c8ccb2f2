use std::time::Instant;

use super::config::{ControllerKind, SimConfig};
use super::metrics::{compute_metrics, realized_step_objective, Metrics, StepRecord};
use crate::control::{solve_rempc, ControlSolution, DisturbanceMode};
use crate::error::{Error, Result};
use crate::forecast::{
    envelope_from_posterior, hybrid_forecast, kc_forecast, nar_forecast, ConfidenceSpec, Envelope,
    HybridState, Method,
};
use crate::gp::{GpDataset, Hyperparameters};
use crate::plant::{rk4_step, GRAMS_TO_KG};
use crate::scenario::{generate, DisturbanceTrace};

#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub controller: ControllerKind,
    pub seed: u64,
    pub rows: Vec<StepRecord>,
    pub metrics: Metrics,
    /// Steps where forecasting failed and the fixed range was used instead.
    pub forecast_fallbacks: usize,
    /// Steps where the optimizer failed and full heating was applied.
    pub solver_fallbacks: usize,
}

/// Per-controller forecasting state carried between control steps.
enum Forecaster {
    None,
    Kc,
    Nar { warm: Option<Vec<Hyperparameters>> },
    Hybrid { state: HybridState },
}

/// Disturbance trace for a run: the configured recording, or the generator.
pub fn disturbance_for(config: &SimConfig) -> Result<DisturbanceTrace> {
    match &config.disturbance_file {
        Some(path) => DisturbanceTrace::read_csv(path),
        None => generate(&config.scenario_for_run()),
    }
}

/// Simulates the configured controller against the true plant.
///
/// At each step the controller sees the measured flow up to now, builds an
/// envelope for the next `np` samples, optimizes the heater sequence and
/// applies its first entry for one step; the plant is driven by the true
/// flow sample at the end of that step.
pub fn run_closed_loop(config: &SimConfig) -> Result<RunRecord> {
    config.validate()?;
    let trace = disturbance_for(config)?;
    run_closed_loop_on(config, &trace)
}

/// As [`run_closed_loop`], on a supplied disturbance trace.
pub fn run_closed_loop_on(config: &SimConfig, trace: &DisturbanceTrace) -> Result<RunRecord> {
    config.validate()?;
    trace.validate()?;
    let t_s = config.forecast.sample_period;
    let np = config.control.np;
    let steps = config.steps();
    let tol = 1e-6 * t_s;
    let k0 = trace
        .position(0.0, tol)
        .ok_or_else(|| Error::Input("disturbance trace has no sample at t = 0".into()))?;
    let needed_history = config.forecast.required_history_len();
    if k0 + 1 < needed_history && config.controller.forecasts() {
        return Err(Error::Input(format!(
            "disturbance trace holds {} samples before the start, {needed_history} needed",
            k0 + 1
        )));
    }
    if trace.len() < k0 + steps + np + 1 {
        return Err(Error::Input(format!(
            "disturbance trace ends at {} s, the run needs samples up to {} s",
            trace.times.last().copied().unwrap_or(f64::NAN),
            (steps + np) as f64 * t_s
        )));
    }
    for (i, &t) in trace.times[k0..=k0 + steps + np].iter().enumerate() {
        if (t - i as f64 * t_s).abs() > tol {
            return Err(Error::Input(format!("trace sample at {t} s is off the {t_s} s grid")));
        }
    }

    let spec = ConfidenceSpec::new(config.forecast.beta)?;
    let fcfg = config.forecast_for_controller();
    let mut forecaster = match config.controller {
        ControllerKind::Perfect | ControllerKind::FixedRange => Forecaster::None,
        ControllerKind::Kc | ControllerKind::KcFf => Forecaster::Kc,
        ControllerKind::Nar => Forecaster::Nar { warm: None },
        ControllerKind::Hybrid | ControllerKind::HybridFf => {
            let mut state = HybridState::new(config.delta1, config.delta2, config.seed)?;
            state.ratio_as_printed = config.ratio_as_printed;
            Forecaster::Hybrid { state }
        }
    };
    let history_start = k0 + 1 - needed_history.min(k0 + 1);

    let mut temp = config.initial_temperature;
    let mut previous: Option<ControlSolution> = None;
    let mut rows = Vec::with_capacity(steps);
    let (mut forecast_fallbacks, mut solver_fallbacks) = (0, 0);
    for k in 0..steps {
        let now_idx = k0 + k;
        let now = trace.times[now_idx];
        let future: Vec<f64> = (1..=np).map(|i| now + i as f64 * t_s).collect();
        let true_future = &trace.true_values[now_idx + 1..=now_idx + np];
        let started = Instant::now();

        let history = || {
            GpDataset::time_series(
                &trace.times[history_start..=now_idx],
                &trace.measured_values[history_start..=now_idx],
            )
        };
        let step_seed = crate::forecast::nar::step_seed(config.seed, k);
        let forecast: Result<(Envelope, Option<Method>)> = match &mut forecaster {
            Forecaster::None => Ok(match config.controller {
                ControllerKind::Perfect => (Envelope::exact(future.clone(), true_future.to_vec(), spec.beta), None),
                _ => (
                    Envelope::fixed_range(future.clone(), config.fixed_range.0, config.fixed_range.1, spec)?,
                    None,
                ),
            }),
            Forecaster::Kc => history()
                .and_then(|h| kc_forecast(&h, &fcfg, None, step_seed))
                .map(|f| (envelope_from_posterior(&f.posterior, spec), None)),
            Forecaster::Nar { warm } => {
                let values = &trace.measured_values[history_start..=now_idx];
                nar_forecast(values, now, &fcfg, warm.as_deref(), step_seed).map(|f| {
                    *warm = Some(f.models);
                    (envelope_from_posterior(&f.posterior, spec), None)
                })
            }
            Forecaster::Hybrid { state } => history()
                .and_then(|h| hybrid_forecast(&h, &fcfg, state))
                .map(|f| {
                    *state = f.state;
                    (f.envelope, Some(f.decision.choice))
                }),
        };
        let (envelope, switch) = match forecast {
            Ok(v) => v,
            Err(_) => {
                forecast_fallbacks += 1;
                let env = Envelope::fixed_range(future.clone(), config.fixed_range.0, config.fixed_range.1, spec)?;
                (env, None)
            }
        };
        let mode = match config.controller {
            ControllerKind::Perfect => DisturbanceMode::Perfect {
                trace: true_future.to_vec(),
            },
            ControllerKind::FixedRange => DisturbanceMode::FixedRange {
                lo: config.fixed_range.0,
                hi: config.fixed_range.1,
            },
            _ => DisturbanceMode::RobustUpper,
        };
        let warm = previous.as_ref().map(ControlSolution::shifted);
        let u = match solve_rempc(temp, &envelope, &mode, &config.plant, &config.control, warm.as_deref()) {
            Ok(sol) => {
                let u = sol.u_seq[0];
                previous = Some(sol);
                u
            }
            Err(_) => {
                solver_fallbacks += 1;
                previous = None;
                config.control.u_max
            }
        };
        let solve_ms = if config.record_timing {
            started.elapsed().as_secs_f64() * 1e3
        } else {
            0.0
        };

        let next_idx = now_idx + 1;
        let mdot_true = trace.true_values[next_idx];
        temp = rk4_step(&config.plant, temp, u, mdot_true * GRAMS_TO_KG, config.control.h);
        rows.push(StepRecord {
            t: trace.times[next_idx],
            temperature: temp,
            u,
            mdot_true,
            mdot_meas: trace.measured_values[next_idx],
            env_lo: envelope.lower[0],
            env_hi: envelope.upper[0],
            switch,
            j_step: realized_step_objective(u, temp, &config.control),
            solve_ms,
        });
    }
    let metrics = compute_metrics(&rows, &config.control);
    Ok(RunRecord {
        controller: config.controller,
        seed: config.seed,
        rows,
        metrics,
        forecast_fallbacks,
        solver_fallbacks,
    })
}
