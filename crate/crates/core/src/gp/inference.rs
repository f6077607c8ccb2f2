//! Posterior prediction and the log marginal likelihood.
//!
//! The training covariance is `K + sigma2·I + D`, where `D` is an optional
//! non-negative diagonal (the forgetting inflation). With `D = 0` these are
//! the textbook zero-mean GP formulas applied to targets minus a constant
//! prior mean.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use super::chol::{dot, Cholesky};
use super::dataset::{forgetting_diag, ForgettingWeights, GpDataset, Hyperparameters, InputGrid, NoiseModel};
use super::kernel::Kernel;
use crate::error::{input_err, Result};

/// Predictive distribution over a query grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Posterior {
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
    pub query_points: InputGrid,
}

impl Posterior {
    /// Marginal variances, with round-off negatives clamped to zero.
    pub fn variance(&self) -> Vec<f64> {
        self.cov.diagonal().iter().map(|v| v.max(0.0)).collect()
    }

    pub fn len(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean.is_empty()
    }
}

fn check_extra_diag(extra_diag: Option<&[f64]>, n: usize) -> Result<()> {
    if let Some(d) = extra_diag {
        if d.len() != n {
            return input_err(format!("extra diagonal has {} entries for {n} points", d.len()));
        }
        if d.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return input_err("extra diagonal entries must be finite and >= 0");
        }
    }
    Ok(())
}

/// Row-major `K(X, X) + sigma2·I + diag(extra)`.
fn train_cov(kernel: &Kernel, inputs: &InputGrid, sigma2: f64, extra: Option<&[f64]>) -> Vec<f64> {
    let n = inputs.len();
    let mut k = vec![0.0; n * n];
    for i in 0..n {
        let xi = inputs.point(i);
        for j in 0..=i {
            let v = kernel.value(xi, inputs.point(j));
            k[i * n + j] = v;
            k[j * n + i] = v;
        }
        k[i * n + i] += sigma2 + extra.map_or(0.0, |d| d[i]);
    }
    k
}

/// GP posterior at `query` given `data`.
///
/// `extra_diag`, when present, is added to the training covariance next to
/// the noise; `None` and an all-zero vector give identical results.
pub fn posterior(
    kernel: &Kernel,
    noise: NoiseModel,
    data: &GpDataset,
    query: &InputGrid,
    prior_mean: f64,
    extra_diag: Option<&[f64]>,
) -> Result<Posterior> {
    let n = data.len();
    if n == 0 {
        return input_err("posterior needs training data");
    }
    if query.dim() != data.inputs.dim() {
        return input_err(format!(
            "query dimension {} differs from training dimension {}",
            query.dim(),
            data.inputs.dim()
        ));
    }
    check_extra_diag(extra_diag, n)?;
    let chol = Cholesky::factor(&train_cov(kernel, &data.inputs, noise.sigma2, extra_diag), n)?;
    let centered: Vec<f64> = data.targets.iter().map(|y| y - prior_mean).collect();
    let alpha = chol.solve(&centered);

    let m = query.len();
    let mut mean = DVector::zeros(m);
    let mut vs: Vec<Vec<f64>> = Vec::with_capacity(m);
    for q in 0..m {
        let xq = query.point(q);
        let mut kq: Vec<f64> = data.inputs.points().map(|x| kernel.value(xq, x)).collect();
        mean[q] = prior_mean + dot(&kq, &alpha);
        chol.solve_lower_in_place(&mut kq);
        vs.push(kq);
    }
    let mut cov = DMatrix::zeros(m, m);
    for a in 0..m {
        for b in 0..=a {
            let v = kernel.value(query.point(a), query.point(b)) - dot(&vs[a], &vs[b]);
            cov[(a, b)] = v;
            cov[(b, a)] = v;
        }
    }
    Ok(Posterior {
        mean,
        cov,
        query_points: query.clone(),
    })
}

/// Log marginal likelihood of the mean-centred targets, including the
/// `-(N/2)·log 2π` constant. `forgetting` inflates the diagonal by the
/// age-dependent term evaluated at `now`.
pub fn log_marginal_likelihood(
    kernel: &Kernel,
    noise: NoiseModel,
    data: &GpDataset,
    forgetting: Option<ForgettingWeights>,
    now: f64,
) -> Result<f64> {
    let extra = match forgetting {
        Some(w) => Some(forgetting_diag(&data.input_times, now, w)?),
        None => None,
    };
    let mu = data.target_mean();
    let centered: Vec<f64> = data.targets.iter().map(|y| y - mu).collect();
    let n = data.len();
    let chol = Cholesky::factor(
        &train_cov(kernel, &data.inputs, noise.sigma2, extra.as_deref()),
        n,
    )?;
    let alpha = chol.solve(&centered);
    Ok(lml_from_parts(&centered, &alpha, &chol))
}

fn lml_from_parts(y: &[f64], alpha: &[f64], chol: &Cholesky) -> f64 {
    let n = y.len() as f64;
    -0.5 * dot(y, alpha) - 0.5 * chol.log_det() - 0.5 * n * (2.0 * PI).ln()
}

/// Log marginal likelihood and its gradient with respect to
/// [`Hyperparameters::log_params`], for already-centred `targets`.
pub fn log_marginal_likelihood_with_grad(
    hyp: &Hyperparameters,
    inputs: &InputGrid,
    targets: &[f64],
    extra_diag: Option<&[f64]>,
) -> Result<(f64, Vec<f64>)> {
    let n = targets.len();
    if inputs.len() != n || n == 0 {
        return input_err("inputs and targets must be non-empty and of equal length");
    }
    check_extra_diag(extra_diag, n)?;
    let kernel = &hyp.kernel;
    let pk = kernel.n_params();
    let sigma2 = hyp.noise.sigma2;

    // Covariance and per-pair kernel gradients over the lower triangle.
    let mut k = vec![0.0; n * n];
    let mut dk = vec![0.0; pk * n * (n + 1) / 2];
    let mut g = vec![0.0; pk];
    let mut pair = 0;
    for i in 0..n {
        let xi = inputs.point(i);
        for j in 0..=i {
            let v = kernel.value_and_log_grad(xi, inputs.point(j), &mut g);
            k[i * n + j] = v;
            k[j * n + i] = v;
            dk[pair * pk..(pair + 1) * pk].copy_from_slice(&g);
            pair += 1;
        }
        k[i * n + i] += sigma2 + extra_diag.map_or(0.0, |d| d[i]);
    }
    let chol = Cholesky::factor(&k, n)?;
    let alpha = chol.solve(targets);
    let lml = lml_from_parts(targets, &alpha, &chol);

    // ∂/∂θ = ½ tr((ααᵀ - K⁻¹) ∂K/∂θ)
    let inv = chol.inverse();
    let mut grad = vec![0.0; pk + 1];
    let mut pair = 0;
    let mut trace_w = 0.0;
    for i in 0..n {
        for j in 0..=i {
            let w = alpha[i] * alpha[j] - inv[i * n + j];
            let weight = if i == j { 0.5 * w } else { w };
            let d = &dk[pair * pk..(pair + 1) * pk];
            for (gp, dv) in grad[..pk].iter_mut().zip(d) {
                *gp += weight * dv;
            }
            if i == j {
                trace_w += w;
            }
            pair += 1;
        }
    }
    grad[pk] = 0.5 * sigma2 * trace_w;
    Ok((lml, grad))
}
