use serde::{Deserialize, Serialize};

use super::kernel::Kernel;
use crate::error::{input_err, Result};

/// A list of equal-dimension input points stored contiguously.
#[derive(Clone, Debug, PartialEq)]
pub struct InputGrid {
    dim: usize,
    values: Vec<f64>,
}

impl InputGrid {
    pub fn new(dim: usize, values: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return input_err("input dimension must be at least 1");
        }
        if values.len() % dim != 0 {
            return input_err(format!(
                "{} values do not split into points of dimension {dim}",
                values.len()
            ));
        }
        Ok(Self { dim, values })
    }

    /// One-dimensional grid, one point per scalar.
    pub fn from_scalars(xs: &[f64]) -> Self {
        Self {
            dim: 1,
            values: xs.to_vec(),
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(1, Vec::len);
        if rows.iter().any(|r| r.len() != dim) {
            return input_err("all input points must share one dimension");
        }
        Self::new(dim, rows.concat())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.dim)
    }
}

/// Training data: inputs, noisy targets and the wall-clock time each target
/// was measured at (used for forgetting ages).
#[derive(Clone, Debug, PartialEq)]
pub struct GpDataset {
    pub inputs: InputGrid,
    pub targets: Vec<f64>,
    pub input_times: Vec<f64>,
}

impl GpDataset {
    pub fn new(inputs: InputGrid, targets: Vec<f64>, input_times: Vec<f64>) -> Result<Self> {
        if targets.is_empty() {
            return input_err("dataset must contain at least one point");
        }
        if inputs.len() != targets.len() || input_times.len() != targets.len() {
            return input_err(format!(
                "dataset lengths differ: {} inputs, {} targets, {} times",
                inputs.len(),
                targets.len(),
                input_times.len()
            ));
        }
        Ok(Self {
            inputs,
            targets,
            input_times,
        })
    }

    /// Time-indexed series where each input is its own measurement time.
    pub fn time_series(times: &[f64], targets: &[f64]) -> Result<Self> {
        Self::new(
            InputGrid::from_scalars(times),
            targets.to_vec(),
            times.to_vec(),
        )
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn target_mean(&self) -> f64 {
        self.targets.iter().sum::<f64>() / self.targets.len() as f64
    }
}

/// Observation noise variance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub sigma2: f64,
}

impl NoiseModel {
    pub fn new(sigma2: f64) -> Result<Self> {
        if !(sigma2.is_finite() && sigma2 >= 0.0) {
            return input_err(format!("noise variance must be >= 0, got {sigma2}"));
        }
        Ok(Self { sigma2 })
    }
}

/// Age-dependent variance inflation `kappa · age^lambda_ff`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForgettingWeights {
    pub kappa: f64,
    pub lambda_ff: f64,
}

impl ForgettingWeights {
    pub fn new(kappa: f64, lambda_ff: f64) -> Result<Self> {
        if !(kappa.is_finite() && kappa >= 0.0 && lambda_ff.is_finite() && lambda_ff >= 0.0) {
            return input_err(format!(
                "forgetting weights must be >= 0, got kappa={kappa} lambda={lambda_ff}"
            ));
        }
        Ok(Self { kappa, lambda_ff })
    }
}

/// Diagonal of the forgetting matrix for measurements taken at `input_times`,
/// evaluated at `now`. Ages are `now - t_i`, so older points get more variance.
pub fn forgetting_diag(input_times: &[f64], now: f64, weights: ForgettingWeights) -> Result<Vec<f64>> {
    input_times
        .iter()
        .map(|&t| {
            let age = now - t;
            if age < 0.0 {
                return input_err(format!("measurement time {t} lies after now={now}"));
            }
            if weights.kappa == 0.0 {
                return Ok(0.0);
            }
            // 0^0 is 1 in powf; a zero-age point carries no extra variance.
            Ok(if age == 0.0 {
                0.0
            } else {
                weights.kappa * age.powf(weights.lambda_ff)
            })
        })
        .collect()
}

/// Kernel plus noise: everything the likelihood is maximized over.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hyperparameters {
    pub kernel: Kernel,
    pub noise: NoiseModel,
}

impl Hyperparameters {
    pub fn n_params(&self) -> usize {
        self.kernel.n_params() + 1
    }

    /// Kernel log-parameters followed by `ln sigma2`.
    pub fn log_params(&self) -> Vec<f64> {
        let mut p = self.kernel.log_params();
        p.push(self.noise.sigma2.ln().max(super::kernel::LOG_FLOOR));
        p
    }

    pub fn with_log_params(&self, p: &[f64]) -> Self {
        let n = self.kernel.n_params();
        Self {
            kernel: self.kernel.with_log_params(&p[..n]),
            noise: NoiseModel {
                sigma2: p[n].exp(),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gain_disables_forgetting() {
        let w = ForgettingWeights::new(0.0, 3.0).unwrap();
        let d = forgetting_diag(&[0.0, 4.0, 9.0], 10.0, w).unwrap();
        assert_eq!(d, vec![0.0; 3]);
    }

    #[test]
    fn forgetting_uses_elapsed_age() {
        let w = ForgettingWeights::new(1.0, 1.0).unwrap();
        let d = forgetting_diag(&[5.0, 10.0], 10.0, w).unwrap();
        assert_eq!(d, vec![5.0, 0.0]);
        let w = ForgettingWeights::new(1.0, 0.0).unwrap();
        assert_eq!(forgetting_diag(&[10.0], 10.0, w).unwrap(), vec![0.0]);
    }

    #[test]
    fn future_measurement_is_rejected() {
        let w = ForgettingWeights::new(1.0, 1.0).unwrap();
        assert!(forgetting_diag(&[11.0], 10.0, w).is_err());
    }

    #[test]
    fn dataset_lengths_must_agree() {
        let g = InputGrid::from_scalars(&[0.0, 1.0]);
        assert!(GpDataset::new(g.clone(), vec![1.0], vec![0.0, 1.0]).is_err());
        assert!(GpDataset::new(g, vec![1.0, 2.0], vec![0.0, 1.0]).is_ok());
        assert!(InputGrid::from_rows(&[vec![1.0, 2.0], vec![3.0]]).is_err());
    }
}
