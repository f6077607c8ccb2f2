//! Validity test for a kernel-composition forecast and the hybrid forecaster
//! that falls back to the auto-regressive models when it fails.

use serde::{Deserialize, Serialize};

use super::config::ForecastConfig;
use super::confidence::ConfidenceSpec;
use super::envelope::{envelope_from_posterior, Envelope};
use super::kc::{kc_forecast, sample_std, trailing};
use super::nar::{nar_forecast, splitmix};
use crate::error::{Error, Result};
use crate::gp::{GpDataset, Hyperparameters, Posterior, TrainingResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "KC")]
    Kc,
    #[serde(rename = "NAR")]
    Nar,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Kc => "KC",
            Method::Nar => "NAR",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SwitchDecision {
    pub choice: Method,
    /// `|std(history)/std(mean) - 1|`
    pub std_ratio_stat: f64,
    /// `|C[Np,Np]/C[1,1] - 1|`, or the reciprocal ratio when configured.
    pub var_ratio_stat: f64,
    pub std_fail: bool,
    pub var_fail: bool,
    pub degenerate: bool,
}

/// Thresholds, cached hyperparameters and random stream for the hybrid
/// forecaster. Threaded explicitly from one control step to the next.
#[derive(Clone, Debug, PartialEq)]
pub struct HybridState {
    pub delta1: f64,
    pub delta2: f64,
    /// Last accepted kernel-composition hyperparameters.
    pub cached_hyperparameters: Option<Hyperparameters>,
    pub rng_seed: u64,
    /// Use `C[1,1]/C[Np,Np]` in the variance test instead of its reciprocal.
    pub ratio_as_printed: bool,
    /// Per-step warm starts for the auto-regressive models.
    pub nar_warm: Option<Vec<Hyperparameters>>,
}

impl HybridState {
    pub fn new(delta1: f64, delta2: f64, rng_seed: u64) -> Result<Self> {
        if !(delta1 > 0.0 && delta2 > 0.0) {
            return Err(Error::Config(format!(
                "switching thresholds must be positive, got {delta1} and {delta2}"
            )));
        }
        Ok(Self {
            delta1,
            delta2,
            cached_hyperparameters: None,
            rng_seed,
            ratio_as_printed: false,
            nar_warm: None,
        })
    }
}

/// Accepts the forecast iff `std_ratio_stat ≤ δ₁²` and `var_ratio_stat ≤ δ₂²`.
///
/// A flat predicted mean or a zero variance in the ratio's denominator makes
/// the statistics meaningless and forces a rejection.
pub fn switch_decide(history_targets: &[f64], post: &Posterior, state: &HybridState) -> SwitchDecision {
    let mean: Vec<f64> = post.mean.iter().copied().collect();
    let n = mean.len();
    let std_hist = sample_std(history_targets);
    let std_pred = sample_std(&mean);
    let (first, last) = if n == 0 {
        (0.0, 0.0)
    } else {
        (post.cov[(0, 0)].max(0.0), post.cov[(n - 1, n - 1)].max(0.0))
    };
    let (num, den) = if state.ratio_as_printed { (first, last) } else { (last, first) };

    let mut degenerate = n < 2 || !(std_pred > 0.0) || !(den > 0.0);
    let std_ratio_stat = if std_pred > 0.0 { (std_hist / std_pred - 1.0).abs() } else { f64::INFINITY };
    let var_ratio_stat = if den > 0.0 { (num / den - 1.0).abs() } else { f64::INFINITY };
    if !(std_ratio_stat.is_finite() && var_ratio_stat.is_finite()) {
        degenerate = true;
    }
    let std_fail = !(std_ratio_stat <= state.delta1 * state.delta1);
    let var_fail = !(var_ratio_stat <= state.delta2 * state.delta2);
    let choice = if std_fail || var_fail || degenerate { Method::Nar } else { Method::Kc };
    SwitchDecision {
        choice,
        std_ratio_stat,
        var_ratio_stat,
        std_fail,
        var_fail,
        degenerate,
    }
}

#[derive(Clone, Debug)]
pub struct HybridForecast {
    pub envelope: Envelope,
    pub decision: SwitchDecision,
    pub state: HybridState,
    /// The kernel-composition training of this step, when it succeeded.
    pub kc_training: Option<TrainingResult>,
}

/// One step of the hybrid forecaster.
///
/// Runs the kernel-composition forecast (warm-started from the cached
/// hyperparameters), tests it, and either caches its hyperparameters and
/// returns its envelope, or clears the cache, advances the random stream and
/// returns the auto-regressive envelope. A failed kernel-composition training
/// counts as a rejection.
pub fn hybrid_forecast(history: &GpDataset, config: &ForecastConfig, state: &HybridState) -> Result<HybridForecast> {
    let spec = ConfidenceSpec::new(config.beta)?;
    let kc = kc_forecast(history, config, state.cached_hyperparameters.as_ref(), state.rng_seed);
    let mut next = state.clone();
    let (decision, kc_training) = match &kc {
        Ok(f) => (switch_decide(&f.window, &f.posterior, state), Some(f.training.clone())),
        Err(_) => (
            SwitchDecision {
                choice: Method::Nar,
                std_ratio_stat: f64::NAN,
                var_ratio_stat: f64::NAN,
                std_fail: false,
                var_fail: false,
                degenerate: true,
            },
            None,
        ),
    };
    if let (Method::Kc, Ok(f)) = (decision.choice, &kc) {
        next.cached_hyperparameters = Some(f.training.hyperparameters.clone());
        return Ok(HybridForecast {
            envelope: envelope_from_posterior(&f.posterior, spec),
            decision,
            state: next,
            kc_training,
        });
    }

    next.cached_hyperparameters = None;
    next.rng_seed = splitmix(state.rng_seed);
    let (times, values) = trailing(history, config.nar_history_len())?;
    let now = *times.last().expect("non-empty history");
    let nar = nar_forecast(&values, now, config, state.nar_warm.as_deref(), state.rng_seed)
        .map_err(|e| Error::Forecast(format!("fallback after rejected forecast: {e}")))?;
    next.nar_warm = Some(nar.models);
    Ok(HybridForecast {
        envelope: envelope_from_posterior(&nar.posterior, spec),
        decision,
        state: next,
        kc_training,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gp::InputGrid;
    use nalgebra::{DMatrix, DVector};

    fn post(mean: Vec<f64>, var: Vec<f64>) -> Posterior {
        let n = mean.len();
        Posterior {
            mean: DVector::from_vec(mean),
            cov: DMatrix::from_diagonal(&DVector::from_vec(var)),
            query_points: InputGrid::from_scalars(&(0..n).map(|i| i as f64).collect::<Vec<_>>()),
        }
    }

    fn state() -> HybridState {
        HybridState::new(0.5f64.sqrt(), 1.0, 1).unwrap()
    }

    #[test]
    fn matching_spread_and_flat_variance_accepts() {
        let hist = vec![1.0, 3.0, 1.0, 3.0];
        let d = switch_decide(&hist, &post(hist.clone(), vec![0.5; 4]), &state());
        assert_eq!(d.choice, Method::Kc);
        assert_eq!(d.std_ratio_stat, 0.0);
        assert_eq!(d.var_ratio_stat, 0.0);
    }

    #[test]
    fn growing_variance_is_rejected() {
        let hist = vec![1.0, 3.0, 1.0, 3.0];
        let d = switch_decide(&hist, &post(hist.clone(), vec![1.0, 2.0, 3.0, 5.0]), &state());
        assert_eq!(d.choice, Method::Nar);
        assert!(d.var_fail && !d.std_fail);
        assert!((d.var_ratio_stat - 4.0).abs() < 1e-12);
    }

    #[test]
    fn printed_orientation_cannot_see_growth() {
        let hist = vec![1.0, 3.0, 1.0, 3.0];
        let s = HybridState { ratio_as_printed: true, ..state() };
        let d = switch_decide(&hist, &post(hist.clone(), vec![1.0, 2.0, 3.0, 5.0]), &s);
        assert!((d.var_ratio_stat - 0.8).abs() < 1e-12);
        assert_eq!(d.choice, Method::Kc);
    }

    #[test]
    fn flat_mean_is_degenerate() {
        let d = switch_decide(&[1.0, 2.0, 3.0], &post(vec![2.0; 3], vec![1.0; 3]), &state());
        assert_eq!(d.choice, Method::Nar);
        assert!(d.degenerate);
        let d = switch_decide(&[1.0, 2.0, 3.0], &post(vec![1.0, 2.0, 3.0], vec![0.0, 1.0, 1.0]), &state());
        assert!(d.degenerate);
    }

    #[test]
    fn thresholds_must_be_positive() {
        assert!(HybridState::new(0.0, 1.0, 0).is_err());
    }
}
