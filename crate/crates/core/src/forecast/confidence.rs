use serde::{Deserialize, Serialize};

use crate::error::{input_err, Result};

/// Confidence level, its error rate and the two-sided critical value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceSpec {
    pub beta: f64,
    pub alpha: f64,
    pub z: f64,
}

impl ConfidenceSpec {
    pub fn new(beta: f64) -> Result<Self> {
        Ok(Self {
            beta,
            alpha: 1.0 - beta,
            z: critical_value(beta)?,
        })
    }
}

/// Two-sided critical value `z = Φ⁻¹(1 - (1-beta)/2)`.
pub fn critical_value(beta: f64) -> Result<f64> {
    if !(beta > 0.0 && beta < 1.0) {
        return input_err(format!("confidence level must lie in (0, 1), got {beta}"));
    }
    Ok(inverse_normal_cdf(1.0 - (1.0 - beta) / 2.0))
}

/// Inverse standard normal CDF by Acklam's rational approximation
/// (relative error below 1.2e-9 over the open unit interval).
pub fn inverse_normal_cdf(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.02425;

    let tail = |q: f64| {
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    if p < P_LOW {
        tail((-2.0 * p.ln()).sqrt())
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -tail((-2.0 * (1.0 - p).ln()).sqrt())
    }
}
