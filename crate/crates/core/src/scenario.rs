//! Seeded inlet-flow profiles and their noisy measurements.
//!
//! Time zero is the instant the controller switches on; samples at negative
//! times form the history available beforehand.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{input_err, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioKind {
    /// Sinusoid around a constant level.
    Sn,
    /// Constant, then a sinusoid from the switch time on.
    Ls,
    /// Constant, then a sinusoid on a rising and later falling ramp.
    Cm,
    /// Clipped Gaussian random walk.
    Rw,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 4] = [ScenarioKind::Sn, ScenarioKind::Ls, ScenarioKind::Cm, ScenarioKind::Rw];

    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioKind::Sn => "sn",
            ScenarioKind::Ls => "ls",
            ScenarioKind::Cm => "cm",
            ScenarioKind::Rw => "rw",
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown scenario '{s}', expected one of sn, ls, cm, rw")))
    }
}

/// Shape parameters for all profiles, g/s and seconds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioShape {
    pub sn_offset: f64,
    pub sn_amplitude: f64,
    pub sn_period: f64,
    pub ls_level: f64,
    pub ls_amplitude: f64,
    pub ls_period: f64,
    pub ls_switch_time: f64,
    pub cm_level: f64,
    pub cm_switch_time: f64,
    pub cm_offset: f64,
    pub cm_amplitude: f64,
    pub cm_period: f64,
    pub cm_slope: f64,
    pub cm_turn_time: f64,
    pub rw_start: f64,
    /// Standard deviation of each random-walk increment.
    pub rw_sigma: f64,
    /// True values are clipped to `[clip_lo, clip_hi]`.
    pub clip_lo: f64,
    pub clip_hi: f64,
}

impl Default for ScenarioShape {
    fn default() -> Self {
        Self {
            sn_offset: 35.0,
            sn_amplitude: 15.0,
            sn_period: 100.0,
            ls_level: 30.0,
            ls_amplitude: 15.0,
            ls_period: 100.0,
            ls_switch_time: 300.0,
            cm_level: 30.0,
            cm_switch_time: 160.0,
            cm_offset: 25.0,
            cm_amplitude: 12.0,
            cm_period: 80.0,
            cm_slope: 0.05,
            cm_turn_time: 400.0,
            rw_start: 35.0,
            rw_sigma: 3.0,
            clip_lo: 0.0,
            clip_hi: 70.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioSpec {
    pub kind: ScenarioKind,
    pub shape: ScenarioShape,
    /// Standard deviation of the additive measurement noise, g/s.
    pub noise_sigma: f64,
    pub seed: u64,
    /// First sample time, s (negative for history before the controller starts).
    pub start_time: f64,
    /// Last sample time, s (inclusive).
    pub end_time: f64,
    pub sample_period: f64,
}

impl Default for ScenarioSpec {
    fn default() -> Self {
        Self {
            kind: ScenarioKind::Sn,
            shape: ScenarioShape::default(),
            noise_sigma: 1.5,
            seed: 0,
            start_time: -100.0,
            end_time: 600.0,
            sample_period: 2.0,
        }
    }
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<()> {
        let s = &self.shape;
        let finite = [
            self.start_time,
            self.end_time,
            s.sn_offset,
            s.sn_amplitude,
            s.ls_level,
            s.ls_amplitude,
            s.ls_switch_time,
            s.cm_level,
            s.cm_switch_time,
            s.cm_offset,
            s.cm_amplitude,
            s.cm_slope,
            s.cm_turn_time,
            s.rw_start,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return input_err("scenario parameters must be finite");
        }
        if !(self.sample_period > 0.0 && self.sample_period.is_finite()) {
            return input_err(format!("sample period must be positive, got {}", self.sample_period));
        }
        if !(self.end_time >= self.start_time) {
            return input_err(format!(
                "scenario ends at {} before it starts at {}",
                self.end_time, self.start_time
            ));
        }
        if !(s.sn_period > 0.0 && s.ls_period > 0.0 && s.cm_period > 0.0) {
            return input_err("scenario periods must be positive");
        }
        if !(self.noise_sigma >= 0.0 && s.rw_sigma >= 0.0) {
            return input_err("noise levels must be non-negative");
        }
        if !(s.clip_lo <= s.clip_hi) {
            return input_err("clip range is empty");
        }
        if s.cm_turn_time < s.cm_switch_time {
            return input_err("ramp turn must not precede the ramp start");
        }
        Ok(())
    }

    /// Sample index of time `t` on the absolute grid `k·sample_period`.
    pub fn index_of(&self, t: f64) -> i64 {
        (t / self.sample_period).round() as i64
    }

    /// Noise-free value of a deterministic profile at time `t`, before
    /// clipping. Random walks have no closed form and return `None`.
    pub fn profile(&self, t: f64) -> Option<f64> {
        let s = &self.shape;
        let wave = |amp: f64, period: f64, phase_t: f64| amp * (2.0 * std::f64::consts::PI * phase_t / period).sin();
        match self.kind {
            ScenarioKind::Sn => Some(s.sn_offset + wave(s.sn_amplitude, s.sn_period, t)),
            ScenarioKind::Ls => Some(if t < s.ls_switch_time {
                s.ls_level
            } else {
                s.ls_level + wave(s.ls_amplitude, s.ls_period, t - s.ls_switch_time)
            }),
            ScenarioKind::Cm => Some(if t < s.cm_switch_time {
                s.cm_level
            } else {
                let base = s.cm_offset + wave(s.cm_amplitude, s.cm_period, t);
                if t < s.cm_turn_time {
                    base + s.cm_slope * (t - s.cm_switch_time)
                } else {
                    base + s.cm_slope * (s.cm_turn_time - s.cm_switch_time) - s.cm_slope * (t - s.cm_turn_time)
                }
            }),
            ScenarioKind::Rw => None,
        }
    }
}

/// Per-sample standard normal draw keyed by the absolute sample index, so
/// overlapping time ranges see identical noise.
fn indexed_normal(seed: u64, index: i64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng.sample(StandardNormal)
}

const WALK_SALT: u64 = 0x5EED_0F_AA11;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisturbanceTrace {
    pub times: Vec<f64>,
    /// Actual flow, g/s.
    pub true_values: Vec<f64>,
    /// What the sensor reports, g/s.
    pub measured_values: Vec<f64>,
}

pub fn generate(spec: &ScenarioSpec) -> Result<DisturbanceTrace> {
    spec.validate()?;
    let (lo, hi) = (spec.shape.clip_lo, spec.shape.clip_hi);
    let k0 = spec.index_of(spec.start_time);
    let k1 = spec.index_of(spec.end_time);
    let mut times = Vec::new();
    let mut true_values = Vec::new();
    let mut measured_values = Vec::new();
    let mut walk = spec.shape.rw_start.clamp(lo, hi);
    for k in k0..=k1 {
        let t = k as f64 * spec.sample_period;
        let w = match spec.profile(t) {
            Some(v) => v.clamp(lo, hi),
            None => {
                if k > k0 {
                    let step = spec.shape.rw_sigma * indexed_normal(spec.seed ^ WALK_SALT, k);
                    walk = (walk + step).clamp(lo, hi);
                }
                walk
            }
        };
        times.push(t);
        true_values.push(w);
        measured_values.push(w + spec.noise_sigma * indexed_normal(spec.seed, k));
    }
    Ok(DisturbanceTrace {
        times,
        true_values,
        measured_values,
    })
}

#[derive(Serialize, Deserialize)]
struct TraceRow {
    t: f64,
    #[serde(rename = "true")]
    true_value: f64,
    measured: f64,
}

impl DisturbanceTrace {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        if self.true_values.len() != self.times.len() || self.measured_values.len() != self.times.len() {
            return input_err("trace columns have different lengths");
        }
        if self.times.windows(2).any(|w| !(w[1] > w[0])) {
            return input_err("trace times must be strictly increasing");
        }
        if self.true_values.iter().chain(&self.measured_values).any(|v| !v.is_finite()) {
            return input_err("trace contains non-finite values");
        }
        Ok(())
    }

    /// Index of the sample at time `t`, if one lies within `tol` seconds.
    pub fn position(&self, t: f64, tol: f64) -> Option<usize> {
        let i = self.times.partition_point(|&x| x < t - tol);
        (i < self.times.len() && (self.times[i] - t).abs() <= tol).then_some(i)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        for i in 0..self.len() {
            w.serialize(TraceRow {
                t: self.times[i],
                true_value: self.true_values[i],
                measured: self.measured_values[i],
            })?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
        let mut trace = DisturbanceTrace {
            times: Vec::new(),
            true_values: Vec::new(),
            measured_values: Vec::new(),
        };
        for row in r.deserialize() {
            let row: TraceRow = row?;
            trace.times.push(row.t);
            trace.true_values.push(row.true_value);
            trace.measured_values.push(row.measured);
        }
        trace.validate()?;
        Ok(trace)
    }
}
