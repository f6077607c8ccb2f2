use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gp::ForgettingWeights;

/// Horizons, sampling and training budgets shared by the forecasters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForecastConfig {
    /// Training-horizon steps; the training window holds `nt + 1` samples.
    pub nt: usize,
    /// Prediction-horizon steps.
    pub np: usize,
    /// Sampling period in seconds.
    pub sample_period: f64,
    /// Lag order of the auto-regressive models.
    pub nar_order: usize,
    /// Measurement-noise variance, the starting noise hyperparameter.
    pub sigma2: f64,
    /// Forgetting inflation for the kernel-composition forecaster.
    pub forgetting: Option<ForgettingWeights>,
    /// Envelope confidence level.
    pub beta: f64,
    /// Starts per kernel-composition training, warm start included.
    pub kc_restarts: usize,
    /// Optimizer iterations per kernel-composition training, split across starts.
    pub kc_max_iterations: usize,
    /// Candidates screened by likelihood for each random kernel-composition start.
    pub kc_screening: usize,
    /// Starts per auto-regressive model training, warm start included.
    pub nar_restarts: usize,
    /// Optimizer iterations per auto-regressive model training.
    pub nar_max_iterations: usize,
}

impl Default for ForecastConfig {
    fn default() -> Self {
        Self {
            nt: 50,
            np: 25,
            sample_period: 2.0,
            nar_order: 3,
            sigma2: 1.5 * 1.5,
            forgetting: None,
            beta: 0.95,
            kc_restarts: 3,
            kc_max_iterations: 200,
            kc_screening: 16,
            nar_restarts: 1,
            nar_max_iterations: 60,
        }
    }
}

impl ForecastConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.np < 1 || self.nar_order < 1 {
            return bad(format!("np and nar_order must be >= 1 (np={}, p={})", self.np, self.nar_order));
        }
        if self.nt < self.nar_order + self.np + 1 {
            return bad(format!(
                "nt={} must be at least nar_order + np + 1 = {}",
                self.nt,
                self.nar_order + self.np + 1
            ));
        }
        if !(self.sample_period > 0.0) {
            return bad(format!("sample period must be positive, got {}", self.sample_period));
        }
        if !(self.sigma2 > 0.0) {
            return bad(format!("sigma2 must be positive, got {}", self.sigma2));
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return bad(format!("beta must lie in (0, 1), got {}", self.beta));
        }
        if self.kc_restarts == 0 || self.nar_restarts == 0 {
            return bad("restart counts must be >= 1".into());
        }
        if self.kc_screening == 0 {
            return bad("kc_screening must be >= 1".into());
        }
        if let Some(f) = self.forgetting {
            ForgettingWeights::new(f.kappa, f.lambda_ff).map_err(|e| Error::Config(e.to_string()))?;
        }
        Ok(())
    }

    /// Samples (current one included) the kernel-composition forecaster reads.
    pub fn kc_history_len(&self) -> usize {
        self.nt + 1
    }

    /// Samples (current one included) the auto-regressive forecaster reads.
    pub fn nar_history_len(&self) -> usize {
        self.nt + self.np + self.nar_order
    }

    pub fn required_history_len(&self) -> usize {
        self.kc_history_len().max(self.nar_history_len())
    }
}
