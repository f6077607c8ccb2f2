//! Covariance functions and their additive composition.
//!
//! Every parameter is strictly positive (the constant level may be zero), so
//! training works on natural logarithms of the parameters. Gradients returned
//! by [`Kernel::value_and_log_grad`] are with respect to those logarithms.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::dataset::InputGrid;
use crate::error::{input_err, Result};

/// Smallest level a constant kernel is mapped to in log space.
pub(crate) const LOG_FLOOR: f64 = -8.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Kernel {
    /// `scale² · exp(-|x-y|² / (2·length²))`
    Rbf { scale: f64, length: f64 },
    /// `x·y / scale²`
    Linear { scale: f64 },
    /// `scale² · exp(-2·sin²(π·|x-y|/period) / roughness²)`
    Periodic {
        scale: f64,
        period: f64,
        roughness: f64,
    },
    /// `level`
    Constant { level: f64 },
    /// Sum of atomic kernels.
    Sum { terms: Vec<Kernel> },
}

/// Role of a single hyperparameter, used when drawing random start points.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParamKind {
    Scale,
    Length,
    Period,
    Roughness,
    Level,
}

impl Kernel {
    /// The trend + cycle + level composition used for long-horizon forecasts.
    pub fn trend_periodic_constant(
        linear_scale: f64,
        periodic_scale: f64,
        period: f64,
        roughness: f64,
        level: f64,
    ) -> Self {
        Kernel::Sum {
            terms: vec![
                Kernel::Linear {
                    scale: linear_scale,
                },
                Kernel::Periodic {
                    scale: periodic_scale,
                    period,
                    roughness,
                },
                Kernel::Constant { level },
            ],
        }
    }

    pub fn validate(&self) -> Result<()> {
        fn positive(name: &str, v: f64) -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                input_err(format!("kernel parameter {name} must be positive, got {v}"))
            }
        }
        match self {
            Kernel::Rbf { scale, length } => {
                positive("rbf.scale", *scale)?;
                positive("rbf.length", *length)
            }
            Kernel::Linear { scale } => positive("linear.scale", *scale),
            Kernel::Periodic {
                scale,
                period,
                roughness,
            } => {
                positive("periodic.scale", *scale)?;
                positive("periodic.period", *period)?;
                positive("periodic.roughness", *roughness)
            }
            Kernel::Constant { level } => {
                if level.is_finite() && *level >= 0.0 {
                    Ok(())
                } else {
                    input_err(format!("constant level must be >= 0, got {level}"))
                }
            }
            Kernel::Sum { terms } => {
                if terms.is_empty() {
                    return input_err("sum kernel needs at least one term");
                }
                for t in terms {
                    if matches!(t, Kernel::Sum { .. }) {
                        return input_err("sum kernels may only contain atomic kernels");
                    }
                    t.validate()?;
                }
                Ok(())
            }
        }
    }

    /// Evaluates `k(x, y)` after checking that both points share a dimension.
    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        if x.len() != y.len() {
            return input_err(format!(
                "kernel inputs differ in dimension: {} vs {}",
                x.len(),
                y.len()
            ));
        }
        Ok(self.value(x, y))
    }

    /// Unchecked evaluation; `x` and `y` must have equal length.
    pub fn value(&self, x: &[f64], y: &[f64]) -> f64 {
        match self {
            Kernel::Rbf { scale, length } => {
                scale * scale * (-0.5 * sq_dist(x, y) / (length * length)).exp()
            }
            Kernel::Linear { scale } => dot(x, y) / (scale * scale),
            Kernel::Periodic {
                scale,
                period,
                roughness,
            } => {
                let s = (PI * sq_dist(x, y).sqrt() / period).sin();
                scale * scale * (-2.0 * s * s / (roughness * roughness)).exp()
            }
            Kernel::Constant { level } => *level,
            Kernel::Sum { terms } => terms.iter().map(|t| t.value(x, y)).sum(),
        }
    }

    /// Evaluates the kernel and writes `∂k/∂(log param)` into `grad`, which
    /// must have length [`Kernel::n_params`].
    pub fn value_and_log_grad(&self, x: &[f64], y: &[f64], grad: &mut [f64]) -> f64 {
        match self {
            Kernel::Rbf { scale, length } => {
                let r2 = sq_dist(x, y) / (length * length);
                let k = scale * scale * (-0.5 * r2).exp();
                grad[0] = 2.0 * k;
                grad[1] = k * r2;
                k
            }
            Kernel::Linear { scale } => {
                let k = dot(x, y) / (scale * scale);
                grad[0] = -2.0 * k;
                k
            }
            Kernel::Periodic {
                scale,
                period,
                roughness,
            } => {
                let a = PI * sq_dist(x, y).sqrt() / period;
                let (s, c) = a.sin_cos();
                let psi2 = roughness * roughness;
                let k = scale * scale * (-2.0 * s * s / psi2).exp();
                grad[0] = 2.0 * k;
                grad[1] = k * 4.0 * a * s * c / psi2;
                grad[2] = k * 4.0 * s * s / psi2;
                k
            }
            Kernel::Constant { level } => {
                grad[0] = *level;
                *level
            }
            Kernel::Sum { terms } => {
                let mut offset = 0;
                let mut total = 0.0;
                for t in terms {
                    let n = match t {
                        Kernel::Rbf { .. } => 2,
                        Kernel::Linear { .. } | Kernel::Constant { .. } => 1,
                        Kernel::Periodic { .. } => 3,
                        Kernel::Sum { .. } => t.n_params(),
                    };
                    total += t.value_and_log_grad(x, y, &mut grad[offset..offset + n]);
                    offset += n;
                }
                total
            }
        }
    }

    pub fn n_params(&self) -> usize {
        match self {
            Kernel::Rbf { .. } => 2,
            Kernel::Linear { .. } | Kernel::Constant { .. } => 1,
            Kernel::Periodic { .. } => 3,
            Kernel::Sum { terms } => terms.iter().map(Kernel::n_params).sum(),
        }
    }

    pub fn param_kinds(&self) -> Vec<ParamKind> {
        match self {
            Kernel::Rbf { .. } => vec![ParamKind::Scale, ParamKind::Length],
            Kernel::Linear { .. } => vec![ParamKind::Scale],
            Kernel::Periodic { .. } => {
                vec![ParamKind::Scale, ParamKind::Period, ParamKind::Roughness]
            }
            Kernel::Constant { .. } => vec![ParamKind::Level],
            Kernel::Sum { terms } => terms.iter().flat_map(Kernel::param_kinds).collect(),
        }
    }

    /// Parameters as natural logarithms, in [`Kernel::value_and_log_grad`] order.
    pub fn log_params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_params());
        self.push_log_params(&mut out);
        out
    }

    fn push_log_params(&self, out: &mut Vec<f64>) {
        match self {
            Kernel::Rbf { scale, length } => {
                out.push(scale.ln());
                out.push(length.ln());
            }
            Kernel::Linear { scale } => out.push(scale.ln()),
            Kernel::Periodic {
                scale,
                period,
                roughness,
            } => {
                out.push(scale.ln());
                out.push(period.ln());
                out.push(roughness.ln());
            }
            Kernel::Constant { level } => out.push(level.ln().max(LOG_FLOOR)),
            Kernel::Sum { terms } => terms.iter().for_each(|t| t.push_log_params(out)),
        }
    }

    /// Same structure with parameters replaced by `exp(log_params)`.
    pub fn with_log_params(&self, log_params: &[f64]) -> Kernel {
        let mut it = log_params.iter().map(|v| v.exp());
        self.rebuild(&mut it)
    }

    fn rebuild(&self, it: &mut impl Iterator<Item = f64>) -> Kernel {
        let mut next = || it.next().expect("parameter vector too short");
        match self {
            Kernel::Rbf { .. } => Kernel::Rbf {
                scale: next(),
                length: next(),
            },
            Kernel::Linear { .. } => Kernel::Linear { scale: next() },
            Kernel::Periodic { .. } => Kernel::Periodic {
                scale: next(),
                period: next(),
                roughness: next(),
            },
            Kernel::Constant { .. } => Kernel::Constant { level: next() },
            Kernel::Sum { terms } => Kernel::Sum {
                terms: terms.iter().map(|t| t.rebuild(it)).collect(),
            },
        }
    }
}

/// `[i, j] = k(X_i, Y_j)`.
pub fn gram_matrix(kernel: &Kernel, xs: &InputGrid, ys: &InputGrid) -> Result<DMatrix<f64>> {
    if xs.is_empty() || ys.is_empty() {
        return input_err("gram matrix needs non-empty grids");
    }
    if xs.dim() != ys.dim() {
        return input_err(format!(
            "grid dimensions differ: {} vs {}",
            xs.dim(),
            ys.dim()
        ));
    }
    Ok(DMatrix::from_fn(xs.len(), ys.len(), |i, j| {
        kernel.value(xs.point(i), ys.point(j))
    }))
}

#[inline]
fn sq_dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

#[inline]
fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rbf_at_zero_distance_is_scale_squared() {
        let k = Kernel::Rbf {
            scale: 2.0,
            length: 1.0,
        };
        assert_eq!(k.eval(&[0.3], &[0.3]).unwrap(), 4.0);
    }

    #[test]
    fn linear_is_scaled_product() {
        let k = Kernel::Linear { scale: 1.0 };
        assert_eq!(k.eval(&[2.0], &[3.0]).unwrap(), 6.0);
    }

    #[test]
    fn periodic_repeats_after_one_period() {
        let k = Kernel::Periodic {
            scale: 1.5,
            period: 10.0,
            roughness: 1.0,
        };
        assert!((k.eval(&[0.0], &[10.0]).unwrap() - 2.25).abs() < 1e-12);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let k = Kernel::Constant { level: 1.0 };
        assert!(k.eval(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn constant_gram_is_flat() {
        let k = Kernel::Constant { level: 3.0 };
        let g = InputGrid::from_scalars(&[0.0, 5.0]);
        let m = gram_matrix(&k, &g, &g).unwrap();
        assert!(m.iter().all(|&v| v == 3.0));
    }

    #[test]
    fn sum_gram_is_elementwise_sum() {
        let a = Kernel::Rbf {
            scale: 1.3,
            length: 0.7,
        };
        let b = Kernel::Linear { scale: 2.0 };
        let s = Kernel::Sum {
            terms: vec![a.clone(), b.clone()],
        };
        let g = InputGrid::from_scalars(&[-1.0, 0.5, 2.0]);
        let ms = gram_matrix(&s, &g, &g).unwrap();
        let sum = gram_matrix(&a, &g, &g).unwrap() + gram_matrix(&b, &g, &g).unwrap();
        assert!((ms - sum).abs().max() < 1e-14);
    }

    #[test]
    fn nested_sums_are_invalid() {
        let k = Kernel::Sum {
            terms: vec![Kernel::Sum {
                terms: vec![Kernel::Constant { level: 1.0 }],
            }],
        };
        assert!(k.validate().is_err());
        assert!(Kernel::Sum { terms: vec![] }.validate().is_err());
        assert!(Kernel::Constant { level: 0.0 }.validate().is_ok());
        assert!(Kernel::Linear { scale: 0.0 }.validate().is_err());
    }

    #[test]
    fn log_params_round_trip() {
        let k = Kernel::trend_periodic_constant(3.0, 1.5, 40.0, 0.8, 0.2);
        let back = k.with_log_params(&k.log_params());
        for (a, b) in k.log_params().iter().zip(back.log_params()) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(k.param_kinds()[2], ParamKind::Period);
    }

    #[test]
    fn log_gradient_matches_finite_differences() {
        let k = Kernel::Sum {
            terms: vec![
                Kernel::Rbf {
                    scale: 1.2,
                    length: 0.9,
                },
                Kernel::Linear { scale: 1.7 },
                Kernel::Periodic {
                    scale: 0.8,
                    period: 2.3,
                    roughness: 1.1,
                },
                Kernel::Constant { level: 0.4 },
            ],
        };
        let (x, y) = ([0.3, -0.2], [1.1, 0.5]);
        let mut g = vec![0.0; k.n_params()];
        k.value_and_log_grad(&x, &y, &mut g);
        let p = k.log_params();
        for i in 0..p.len() {
            let h = 1e-6;
            let mut up = p.clone();
            up[i] += h;
            let mut dn = p.clone();
            dn[i] -= h;
            let fd = (k.with_log_params(&up).value(&x, &y) - k.with_log_params(&dn).value(&x, &y))
                / (2.0 * h);
            assert!((fd - g[i]).abs() < 1e-7 * (1.0 + fd.abs()), "param {i}: {fd} vs {}", g[i]);
        }
    }
}
