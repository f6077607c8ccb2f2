use serde::{Deserialize, Serialize};

use super::confidence::ConfidenceSpec;
use crate::error::{input_err, Result};
use crate::gp::Posterior;

/// Per-step disturbance interval over the prediction horizon.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub step_times: Vec<f64>,
    pub lower: Vec<f64>,
    pub mean: Vec<f64>,
    pub upper: Vec<f64>,
    pub variance: Vec<f64>,
    pub beta: f64,
}

impl Envelope {
    pub fn len(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean.is_empty()
    }

    /// Zero-width envelope pinned to known values.
    pub fn exact(step_times: Vec<f64>, values: Vec<f64>, beta: f64) -> Self {
        let n = values.len();
        Self {
            step_times,
            lower: values.clone(),
            upper: values.clone(),
            mean: values,
            variance: vec![0.0; n],
            beta,
        }
    }

    /// Constant interval `[lo, hi]` at every step.
    pub fn fixed_range(step_times: Vec<f64>, lo: f64, hi: f64, spec: ConfidenceSpec) -> Result<Self> {
        if !(lo <= hi) {
            return input_err(format!("fixed range needs lo <= hi, got [{lo}, {hi}]"));
        }
        let n = step_times.len();
        let half = 0.5 * (hi - lo);
        let sd = half / spec.z;
        Ok(Self {
            step_times,
            lower: vec![lo; n],
            mean: vec![lo + half; n],
            upper: vec![hi; n],
            variance: vec![sd * sd; n],
            beta: spec.beta,
        })
    }

    pub fn width(&self, i: usize) -> f64 {
        self.upper[i] - self.lower[i]
    }
}

/// `mean ± z·√var` at each query point of a one-dimensional posterior.
pub fn envelope_from_posterior(post: &Posterior, spec: ConfidenceSpec) -> Envelope {
    let variance = post.variance();
    let mean: Vec<f64> = post.mean.iter().copied().collect();
    let half: Vec<f64> = variance.iter().map(|v| spec.z * v.sqrt()).collect();
    Envelope {
        step_times: post.query_points.points().map(|p| p[0]).collect(),
        lower: mean.iter().zip(&half).map(|(m, h)| m - h).collect(),
        upper: mean.iter().zip(&half).map(|(m, h)| m + h).collect(),
        mean,
        variance,
        beta: spec.beta,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gp::InputGrid;
    use nalgebra::{DMatrix, DVector};

    fn post(mean: f64, var: f64) -> Posterior {
        Posterior {
            mean: DVector::from_element(2, mean),
            cov: DMatrix::from_diagonal_element(2, 2, var),
            query_points: InputGrid::from_scalars(&[1.0, 2.0]),
        }
    }

    #[test]
    fn zero_variance_collapses() {
        let e = envelope_from_posterior(&post(3.0, 0.0), ConfidenceSpec::new(0.95).unwrap());
        assert_eq!(e.lower, e.mean);
        assert_eq!(e.upper, e.mean);
    }

    #[test]
    fn unit_variance_at_95() {
        let e = envelope_from_posterior(&post(0.0, 1.0), ConfidenceSpec::new(0.95).unwrap());
        assert!((e.upper[0] - 1.96).abs() < 0.005);
        assert!((e.lower[0] + 1.96).abs() < 0.005);
        assert_eq!(e.step_times, vec![1.0, 2.0]);
    }

    #[test]
    fn negative_roundoff_variance_is_clamped() {
        let e = envelope_from_posterior(&post(1.0, -1e-14), ConfidenceSpec::new(0.95).unwrap());
        assert_eq!(e.variance, vec![0.0, 0.0]);
    }

    #[test]
    fn fixed_range_is_symmetric() {
        let s = ConfidenceSpec::new(0.95).unwrap();
        let e = Envelope::fixed_range(vec![2.0, 4.0], 0.0, 70.0, s).unwrap();
        assert_eq!(e.upper, vec![70.0; 2]);
        assert!((e.upper[0] - e.mean[0] - s.z * e.variance[0].sqrt()).abs() < 1e-9);
        assert!(Envelope::fixed_range(vec![2.0], 5.0, 1.0, s).is_err());
    }
}
