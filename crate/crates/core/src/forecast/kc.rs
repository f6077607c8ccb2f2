//! Long-horizon forecasting with an additive trend + cycle + level kernel.

use super::config::ForecastConfig;
use crate::error::{input_err, Result};
use crate::gp::{
    forgetting_diag, posterior, train, GpDataset, Hyperparameters, InputGrid, Kernel, NoiseModel, Posterior,
    TrainOptions, TrainingResult,
};

#[derive(Clone, Debug)]
pub struct KcForecast {
    /// Prediction over the `np` future sampling instants; query points are
    /// absolute times.
    pub posterior: Posterior,
    pub training: TrainingResult,
    /// Measured values of the training window, oldest first.
    pub window: Vec<f64>,
}

/// Trailing `len` samples of a time-indexed history as (times, values).
pub(crate) fn trailing(history: &GpDataset, len: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if history.inputs.dim() != 1 {
        return input_err("history must be indexed by scalar time");
    }
    let n = history.len();
    if n < len {
        return input_err(format!("history has {n} samples, {len} needed"));
    }
    Ok((
        history.input_times[n - len..].to_vec(),
        history.targets[n - len..].to_vec(),
    ))
}

pub(crate) fn sample_std(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = xs.iter().sum::<f64>() / xs.len() as f64;
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

/// Template hyperparameters for a training window of values `ys` spanning
/// `window_secs` seconds.
pub fn kc_template(ys: &[f64], window_secs: f64, config: &ForecastConfig) -> Hyperparameters {
    let sd = sample_std(ys).max(0.1);
    let t = config.sample_period;
    Hyperparameters {
        kernel: Kernel::trend_periodic_constant(
            (0.5 * window_secs / sd).max(1e-3),
            sd,
            (4.0 * t * window_secs).sqrt(),
            1.0,
            1.0,
        ),
        noise: NoiseModel {
            sigma2: config.sigma2,
        },
    }
}

/// Trains the composite kernel on the last `nt + 1` samples and predicts the
/// next `np` samples.
///
/// Inputs are centred on the training window's midpoint so the linear term
/// pivots inside the data. With `config.forgetting` set, the age inflation
/// enters both the likelihood and the predictive equations.
pub fn kc_forecast(
    history: &GpDataset,
    config: &ForecastConfig,
    warm: Option<&Hyperparameters>,
    seed: u64,
) -> Result<KcForecast> {
    let (times, ys) = trailing(history, config.kc_history_len())?;
    let now = *times.last().expect("non-empty window");
    let window_secs = now - times[0];
    let mid = 0.5 * (now + times[0]);
    let rel: Vec<f64> = times.iter().map(|t| t - mid).collect();
    let data = GpDataset::new(InputGrid::from_scalars(&rel), ys.clone(), times.clone())?;

    let template = kc_template(&ys, window_secs, config);
    let t = config.sample_period;
    let opts = TrainOptions {
        restarts: config.kc_restarts,
        max_iterations: (config.kc_max_iterations / config.kc_restarts).max(1),
        seed,
        period_init: Some((4.0 * t, (config.nt as f64 * t).max(4.0 * t))),
        now,
        screening: config.kc_screening,
        period_bounds: None,
    };
    let training = train(&template, &data, config.forgetting, warm, &opts)?;

    let future: Vec<f64> = (1..=config.np).map(|i| now + i as f64 * t).collect();
    let query = InputGrid::from_scalars(&future.iter().map(|f| f - mid).collect::<Vec<_>>());
    let extra = match config.forgetting {
        Some(w) => Some(forgetting_diag(&times, now, w)?),
        None => None,
    };
    let hyp = &training.hyperparameters;
    let mut post = posterior(
        &hyp.kernel,
        hyp.noise,
        &data,
        &query,
        data.target_mean(),
        extra.as_deref(),
    )?;
    post.query_points = InputGrid::from_scalars(&future);
    Ok(KcForecast {
        posterior: post,
        training,
        window: ys,
    })
}
