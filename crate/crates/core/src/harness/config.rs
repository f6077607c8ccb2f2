use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::control::ControlConfig;
use crate::error::{Error, Result};
use crate::forecast::ForecastConfig;
use crate::gp::ForgettingWeights;
use crate::plant::PlantParams;
use crate::scenario::ScenarioSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ControllerKind {
    #[serde(rename = "perfect")]
    Perfect,
    #[serde(rename = "fixed_range")]
    FixedRange,
    #[serde(rename = "kc")]
    Kc,
    #[serde(rename = "kcff")]
    KcFf,
    #[serde(rename = "nar")]
    Nar,
    #[serde(rename = "hybrid")]
    Hybrid,
    #[serde(rename = "hybridff")]
    HybridFf,
}

impl ControllerKind {
    /// The seven controllers compared by default, in table order.
    pub const LINEUP: [ControllerKind; 7] = [
        ControllerKind::Perfect,
        ControllerKind::FixedRange,
        ControllerKind::Kc,
        ControllerKind::KcFf,
        ControllerKind::Nar,
        ControllerKind::Hybrid,
        ControllerKind::HybridFf,
    ];

    /// Identifier accepted on the command line and in config files.
    pub fn id(self) -> &'static str {
        match self {
            ControllerKind::Perfect => "perfect",
            ControllerKind::FixedRange => "fixed_range",
            ControllerKind::Kc => "kc",
            ControllerKind::KcFf => "kcff",
            ControllerKind::Nar => "nar",
            ControllerKind::Hybrid => "hybrid",
            ControllerKind::HybridFf => "hybridff",
        }
    }

    /// Name used in result tables.
    pub fn label(self) -> &'static str {
        match self {
            ControllerKind::Perfect => "Perfect",
            ControllerKind::FixedRange => "FixedRange",
            ControllerKind::Kc => "KC",
            ControllerKind::KcFf => "KCff",
            ControllerKind::Nar => "NAR",
            ControllerKind::Hybrid => "Hybrid",
            ControllerKind::HybridFf => "Hybridff",
        }
    }

    pub fn uses_forgetting(self) -> bool {
        matches!(self, ControllerKind::KcFf | ControllerKind::HybridFf)
    }

    pub fn is_hybrid(self) -> bool {
        matches!(self, ControllerKind::Hybrid | ControllerKind::HybridFf)
    }

    /// Whether the controller learns from measured history.
    pub fn forecasts(self) -> bool {
        !matches!(self, ControllerKind::Perfect | ControllerKind::FixedRange)
    }
}

impl fmt::Display for ControllerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ControllerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s.chars().filter(|c| *c != '_' && *c != '-').collect::<String>().to_lowercase();
        Self::LINEUP
            .into_iter()
            .find(|k| k.id().replace('_', "") == key)
            .ok_or_else(|| {
                let names: Vec<&str> = Self::LINEUP.iter().map(|k| k.id()).collect();
                Error::Config(format!("unknown controller '{s}', expected one of {}", names.join(", ")))
            })
    }
}

/// Everything needed to reproduce one closed-loop run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    /// Disturbance profile. Its seed and time range are set by the harness
    /// from `seed`, `duration` and the required history.
    pub scenario: ScenarioSpec,
    pub controller: ControllerKind,
    pub forecast: ForecastConfig,
    pub control: ControlConfig,
    pub plant: PlantParams,
    /// Validity thresholds of the hybrid forecaster.
    pub delta1: f64,
    pub delta2: f64,
    /// Use the reciprocal variance ratio in the hybrid validity test.
    pub ratio_as_printed: bool,
    /// Age inflation used by the forgetting variants.
    pub forgetting: ForgettingWeights,
    /// Closed-loop span after the controller starts, seconds.
    pub duration: f64,
    /// Minimum measured history before the controller starts, seconds.
    /// Extended automatically when the forecasters need more.
    pub preroll: f64,
    pub initial_temperature: f64,
    /// Interval assumed by the fixed-range controller, g/s.
    pub fixed_range: (f64, f64),
    pub seed: u64,
    /// Record wall-clock solve times. Off by default so that logs are
    /// reproducible byte for byte.
    pub record_timing: bool,
    /// Drive the run from a recorded `t,true,measured` trace instead of the
    /// generator.
    pub disturbance_file: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            scenario: ScenarioSpec::default(),
            controller: ControllerKind::Hybrid,
            forecast: ForecastConfig::default(),
            control: ControlConfig::default(),
            plant: PlantParams::default(),
            delta1: 0.5f64.sqrt(),
            delta2: 1.0,
            ratio_as_printed: false,
            forgetting: ForgettingWeights {
                kappa: 1.0,
                lambda_ff: 1.0,
            },
            duration: 600.0,
            preroll: 100.0,
            initial_temperature: 60.0,
            fixed_range: (0.0, 70.0),
            seed: 0,
            record_timing: false,
            disturbance_file: None,
            output_dir: None,
        }
    }
}

impl SimConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("invalid config {}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        let cfg = |e: Error| match e {
            Error::Config(m) | Error::Input(m) => Error::Config(m),
            other => other,
        };
        self.forecast.validate().map_err(cfg)?;
        self.control.validate().map_err(cfg)?;
        self.plant.validate().map_err(cfg)?;
        self.scenario.validate().map_err(cfg)?;
        if self.forecast.np != self.control.np {
            return Err(Error::Config(format!(
                "forecast horizon {} differs from control horizon {}",
                self.forecast.np, self.control.np
            )));
        }
        if (self.forecast.sample_period - self.control.h).abs() > 1e-12
            || (self.forecast.sample_period - self.scenario.sample_period).abs() > 1e-12
        {
            return Err(Error::Config(
                "sample periods of forecast, control and scenario must agree".into(),
            ));
        }
        if !(self.delta1 > 0.0 && self.delta2 > 0.0) {
            return Err(Error::Config("switching thresholds must be positive".into()));
        }
        ForgettingWeights::new(self.forgetting.kappa, self.forgetting.lambda_ff).map_err(cfg)?;
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(Error::Config(format!("duration must be positive, got {}", self.duration)));
        }
        if !(self.preroll >= 0.0 && self.preroll.is_finite()) {
            return Err(Error::Config(format!("preroll must be non-negative, got {}", self.preroll)));
        }
        if !self.initial_temperature.is_finite() {
            return Err(Error::Config("initial temperature must be finite".into()));
        }
        if !(self.fixed_range.0 <= self.fixed_range.1) {
            return Err(Error::Config("fixed range is empty".into()));
        }
        Ok(())
    }

    /// Control steps in the run.
    pub fn steps(&self) -> usize {
        (self.duration / self.control.h).round() as usize
    }

    /// History steps before the controller starts: the configured pre-roll,
    /// or what the forecasters need if that is longer. Independent of the
    /// controller so that every controller sees the same realization.
    pub fn preroll_steps(&self) -> usize {
        let configured = (self.preroll / self.forecast.sample_period).ceil() as usize;
        configured.max(self.forecast.required_history_len() - 1)
    }

    /// Forecast settings for the configured controller.
    pub fn forecast_for_controller(&self) -> ForecastConfig {
        let mut f = self.forecast.clone();
        f.forgetting = self.controller.uses_forgetting().then_some(self.forgetting);
        f
    }

    /// Scenario settings covering the pre-roll, the run and one horizon beyond it.
    pub fn scenario_for_run(&self) -> ScenarioSpec {
        let t = self.forecast.sample_period;
        ScenarioSpec {
            seed: self.seed,
            start_time: -(self.preroll_steps() as f64) * t,
            end_time: (self.steps() + self.control.np) as f64 * t,
            sample_period: t,
            ..self.scenario.clone()
        }
    }
}
