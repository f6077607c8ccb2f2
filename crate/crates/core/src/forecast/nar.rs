//! Direct multi-step forecasting: one independent GP per step ahead, each
//! regressing the value `chi` steps later on a window of `p` lagged values.

use nalgebra::{DMatrix, DVector};

use super::config::ForecastConfig;
use super::kc::sample_std;
use crate::error::{input_err, Error, Result};
use crate::gp::{posterior, train, GpDataset, Hyperparameters, InputGrid, Kernel, NoiseModel, Posterior, TrainOptions};

/// Lag rows (most recent first) and their targets for step `chi`.
///
/// With `w_k` the last element of `history`, row `r` is
/// `[w_{k-chi-r}, …, w_{k-chi-r-p+1}]` and target `r` is `w_{k-r}`, for
/// `r = 0..=nt`.
pub fn build_lag_matrix(history: &[f64], chi: usize, p: usize, nt: usize) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    if chi == 0 || p == 0 {
        return input_err("step and order must be >= 1");
    }
    let need = nt + chi + p;
    if history.len() < need {
        return input_err(format!(
            "lag matrix for chi={chi}, p={p}, nt={nt} needs {need} samples, got {}",
            history.len()
        ));
    }
    let k = history.len() - 1;
    let at = |back: usize| history[k - back];
    let rows = (0..=nt)
        .map(|r| (0..p).map(|c| at(chi + r + c)).collect())
        .collect();
    let targets = (0..=nt).map(at).collect();
    Ok((rows, targets))
}

#[derive(Clone, Debug)]
pub struct NarForecast {
    /// Per-step means and variances; covariance is diagonal.
    pub posterior: Posterior,
    /// Hyperparameters used for each step, index `chi - 1`.
    pub models: Vec<Hyperparameters>,
}

/// RBF over the lag vector plus a constant, with the configured noise.
pub fn nar_template(history: &[f64], targets: &[f64], config: &ForecastConfig) -> Hyperparameters {
    let sd = sample_std(targets).max(0.1);
    let spread = sample_std(history).max(0.1) * (config.nar_order as f64).sqrt();
    Hyperparameters {
        kernel: Kernel::Sum {
            terms: vec![
                Kernel::Rbf {
                    scale: sd,
                    length: spread,
                },
                Kernel::Constant { level: 0.1 },
            ],
        },
        noise: NoiseModel {
            sigma2: config.sigma2,
        },
    }
}

/// Forecasts `np` steps after the last element of `history`, measured at
/// `now`. `warm[chi-1]` seeds the training for step `chi`; a failed training
/// falls back to that warm start or the default template.
pub fn nar_forecast(
    history: &[f64],
    now: f64,
    config: &ForecastConfig,
    warm: Option<&[Hyperparameters]>,
    seed: u64,
) -> Result<NarForecast> {
    let p = config.nar_order;
    if history.len() < config.nar_history_len() {
        return input_err(format!(
            "auto-regressive forecast needs {} samples, got {}",
            config.nar_history_len(),
            history.len()
        ));
    }
    let k = history.len() - 1;
    let present: Vec<f64> = (0..p).map(|c| history[k - c]).collect();
    let query = InputGrid::new(p, present)?;
    let window = &history[history.len() - config.nar_history_len()..];

    let mut means = Vec::with_capacity(config.np);
    let mut vars = Vec::with_capacity(config.np);
    let mut models = Vec::with_capacity(config.np);
    for chi in 1..=config.np {
        let (rows, targets) = build_lag_matrix(history, chi, p, config.nt)?;
        let times: Vec<f64> = (0..=config.nt)
            .map(|r| now - (r as f64) * config.sample_period)
            .collect();
        let data = GpDataset::new(InputGrid::from_rows(&rows)?, targets.clone(), times)?;
        let template = nar_template(window, &targets, config);
        let warm_chi = warm.and_then(|w| w.get(chi - 1)).filter(|h| h.kernel.param_kinds() == template.kernel.param_kinds());
        let opts = TrainOptions {
            restarts: config.nar_restarts,
            max_iterations: config.nar_max_iterations,
            seed: step_seed(seed, chi),
            period_init: None,
            now,
            screening: 1,
            period_bounds: None,
        };
        let hyp = match train(&template, &data, None, warm_chi, &opts) {
            Ok(r) => r.hyperparameters,
            Err(_) => warm_chi.cloned().unwrap_or(template),
        };
        let post = posterior(&hyp.kernel, hyp.noise, &data, &query, data.target_mean(), None)
            .map_err(|e| Error::Forecast(format!("step {chi}: {e}")))?;
        means.push(post.mean[0]);
        vars.push(post.cov[(0, 0)].max(0.0));
        models.push(hyp);
    }
    let future: Vec<f64> = (1..=config.np)
        .map(|i| now + i as f64 * config.sample_period)
        .collect();
    Ok(NarForecast {
        posterior: Posterior {
            mean: DVector::from_vec(means),
            cov: DMatrix::from_diagonal(&DVector::from_vec(vars)),
            query_points: InputGrid::from_scalars(&future),
        },
        models,
    })
}

/// Independent per-step seed, so results do not depend on training order.
pub(crate) fn step_seed(seed: u64, chi: usize) -> u64 {
    splitmix(seed ^ (chi as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

pub(crate) fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
