//! Multi-start maximization of the log marginal likelihood.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::dataset::{forgetting_diag, ForgettingWeights, GpDataset, Hyperparameters, NoiseModel};
use super::inference::{log_marginal_likelihood, log_marginal_likelihood_with_grad};
use super::kernel::{Kernel, ParamKind};
use super::optimize::{minimize_box, BoxLbfgsOptions};
use crate::error::{input_err, Error, Result};

/// Log-parameter box: every positive hyperparameter stays in `[e⁻⁸, e⁸]`.
pub const LOG_BOUND: f64 = 8.0;
/// Random starts perturb each template log-parameter by up to this much.
pub const START_SPREAD: f64 = 2.0;

#[derive(Clone, Debug)]
pub struct TrainOptions {
    /// Total number of starts, the warm start (if any) included.
    pub restarts: usize,
    /// Optimizer iterations allowed per start.
    pub max_iterations: usize,
    pub seed: u64,
    /// Log-uniform range for periodic-kernel periods on random starts,
    /// replacing the default spread around the template.
    pub period_init: Option<(f64, f64)>,
    /// Time at which forgetting ages are measured.
    pub now: f64,
    /// Random candidates drawn per random start. The likelihood is evaluated
    /// once at each and the best ones are optimized; 1 disables screening.
    pub screening: usize,
    /// Optimization box for periodic-kernel periods, replacing the generic
    /// log-parameter bound.
    pub period_bounds: Option<(f64, f64)>,
}

impl Default for TrainOptions {
    fn default() -> Self {
        Self {
            restarts: 3,
            max_iterations: 100,
            seed: 0,
            period_init: None,
            now: 0.0,
            screening: 1,
            period_bounds: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainingResult {
    pub hyperparameters: Hyperparameters,
    pub log_marginal: f64,
    pub restarts_used: usize,
    pub converged: bool,
}

/// Fits kernel and noise hyperparameters by maximizing the (optionally
/// forgetting-weighted) log marginal likelihood of the mean-centred targets.
///
/// Starts are the warm start first, when given, then random draws around
/// `template`. Starts whose initial evaluation fails are discarded.
pub fn train(
    template: &Hyperparameters,
    data: &GpDataset,
    forgetting: Option<ForgettingWeights>,
    warm_start: Option<&Hyperparameters>,
    opts: &TrainOptions,
) -> Result<TrainingResult> {
    if opts.restarts == 0 {
        return input_err("training needs at least one start");
    }
    if data.len() < 3 {
        return input_err(format!("training needs at least 3 points, got {}", data.len()));
    }
    template.kernel.validate()?;
    if let Some(w) = warm_start {
        if w.kernel.param_kinds() != template.kernel.param_kinds() {
            return input_err("warm start has a different kernel structure than the template");
        }
    }
    let extra = match forgetting {
        Some(w) => Some(forgetting_diag(&data.input_times, opts.now, w)?),
        None => None,
    };
    let mu = data.target_mean();
    let centered: Vec<f64> = data.targets.iter().map(|y| y - mu).collect();

    let n = template.n_params();
    let mut lower = vec![-LOG_BOUND; n];
    let mut upper = vec![LOG_BOUND; n];
    if let Some((lo, hi)) = opts.period_bounds {
        if !(lo > 0.0 && lo <= hi) {
            return input_err(format!("invalid period bounds [{lo}, {hi}]"));
        }
        for (i, kind) in template.kernel.param_kinds().iter().enumerate() {
            if *kind == ParamKind::Period {
                lower[i] = lo.ln().max(-LOG_BOUND);
                upper[i] = hi.ln().min(LOG_BOUND);
            }
        }
    }
    let lbfgs = BoxLbfgsOptions {
        max_iterations: opts.max_iterations,
        ..Default::default()
    };

    let objective = |p: &[f64]| -> Option<(f64, Vec<f64>)> {
        let hyp = template.with_log_params(p);
        let (l, g) = log_marginal_likelihood_with_grad(&hyp, &data.inputs, &centered, extra.as_deref()).ok()?;
        Some((-l, g.into_iter().map(|v| -v).collect()))
    };

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut starts: Vec<Vec<f64>> = Vec::with_capacity(opts.restarts);
    if let Some(w) = warm_start {
        starts.push(w.log_params());
    }
    let random_slots = opts.restarts - starts.len();
    let pool = random_slots * opts.screening.max(1);
    let mut candidates: Vec<(f64, Vec<f64>)> = (0..pool)
        .map(|_| {
            let p = random_start(template, opts.period_init, &mut rng);
            let score = if opts.screening > 1 {
                let hyp = template.with_log_params(&p);
                log_marginal_likelihood(&hyp.kernel, hyp.noise, data, forgetting, opts.now)
                    .ok()
                    .filter(|l| l.is_finite())
                    .map_or(f64::INFINITY, |l| -l)
            } else {
                0.0
            };
            (score, p)
        })
        .collect();
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0));
    starts.extend(candidates.into_iter().take(random_slots).map(|(_, p)| p));

    let mut best: Option<(Vec<f64>, f64, bool)> = None;
    let mut used = 0;
    for start in &starts {
        let Some(m) = minimize_box(objective, start, &lower, &upper, &lbfgs) else {
            continue;
        };
        used += 1;
        let lml = -m.value;
        if best.as_ref().is_none_or(|(_, b, _)| lml > *b) {
            best = Some((m.x, lml, m.converged));
        }
    }
    let Some((x, log_marginal, converged)) = best else {
        return Err(Error::Training(format!(
            "likelihood undefined at all {} start points",
            starts.len()
        )));
    };
    Ok(TrainingResult {
        hyperparameters: template.with_log_params(&x),
        log_marginal,
        restarts_used: used,
        converged,
    })
}

fn random_start(template: &Hyperparameters, period_init: Option<(f64, f64)>, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let base = template.log_params();
    let mut kinds = template.kernel.param_kinds();
    kinds.push(ParamKind::Scale);
    base.iter()
        .zip(&kinds)
        .map(|(&b, kind)| {
            let v = match (kind, period_init) {
                (ParamKind::Period, Some((lo, hi))) => rng.random_range(lo.ln()..=hi.ln()),
                _ => b + rng.random_range(-START_SPREAD..=START_SPREAD),
            };
            v.clamp(-LOG_BOUND, LOG_BOUND)
        })
        .collect()
}

/// Convenience: hyperparameters with the given kernel and noise variance.
pub fn hyperparameters(kernel: Kernel, sigma2: f64) -> Result<Hyperparameters> {
    kernel.validate()?;
    Ok(Hyperparameters {
        kernel,
        noise: NoiseModel::new(sigma2)?,
    })
}
