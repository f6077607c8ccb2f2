use std::path::Path;

use serde::Serialize;

use super::config::{ControllerKind, SimConfig};
use super::metrics::Metrics;
use super::output::write_atomic;
use super::run::{disturbance_for, run_closed_loop_on};
use crate::error::{input_err, Result};

/// Metrics of one controller on one seed, or the error that stopped it.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub controller: ControllerKind,
    pub seed: u64,
    pub metrics: std::result::Result<Metrics, String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub controller: String,
    pub runs: usize,
    pub failed: usize,
    /// Mean and sample standard deviation of each metric over the
    /// successful runs, in `Metrics::FIELDS` order.
    pub mean: [f64; 5],
    pub sd: [f64; 5],
    /// Mean objective divided by the perfect-information controller's, when
    /// that controller is part of the comparison.
    pub normalized_objective: Option<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug)]
pub struct ComparisonTable {
    pub rows: Vec<ComparisonRow>,
    pub outcomes: Vec<RunOutcome>,
}

impl ComparisonTable {
    /// Metrics of `controller` on `seed`, if that run succeeded.
    pub fn metrics(&self, controller: ControllerKind, seed: u64) -> Option<&Metrics> {
        self.outcomes
            .iter()
            .find(|o| o.controller == controller && o.seed == seed)
            .and_then(|o| o.metrics.as_ref().ok())
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["controller".to_string(), "runs".into(), "failed".into()];
        for f in Metrics::FIELDS {
            header.push(format!("{f}_mean"));
            header.push(format!("{f}_sd"));
        }
        header.push("normalized_objective".into());
        header.push("error".into());
        w.write_record(&header)?;
        for r in &self.rows {
            let mut rec = vec![r.controller.clone(), r.runs.to_string(), r.failed.to_string()];
            for i in 0..5 {
                rec.push(r.mean[i].to_string());
                rec.push(r.sd[i].to_string());
            }
            rec.push(r.normalized_objective.map(|v| v.to_string()).unwrap_or_default());
            rec.push(r.error.clone().unwrap_or_default());
            w.write_record(&rec)?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        write_atomic(path, &bytes)
    }
}

pub(crate) fn mean_sd(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let sd = if xs.len() < 2 {
        0.0
    } else {
        (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0)).sqrt()
    };
    (m, sd)
}

/// Runs every controller on every seed. Controllers sharing a seed see the
/// same disturbance realization.
pub fn compare_controllers(base: &SimConfig, controllers: &[ControllerKind], seeds: &[u64]) -> Result<ComparisonTable> {
    if seeds.is_empty() {
        return input_err("comparison needs at least one seed");
    }
    if controllers.is_empty() {
        return input_err("comparison needs at least one controller");
    }
    base.validate()?;
    let mut outcomes = Vec::new();
    for &seed in seeds {
        let seeded = SimConfig {
            seed,
            ..base.clone()
        };
        let trace = disturbance_for(&seeded)?;
        for &controller in controllers {
            let cfg = SimConfig {
                controller,
                ..seeded.clone()
            };
            let metrics = run_closed_loop_on(&cfg, &trace)
                .map(|r| r.metrics)
                .map_err(|e| e.to_string());
            outcomes.push(RunOutcome {
                controller,
                seed,
                metrics,
            });
        }
    }

    let mut rows: Vec<ComparisonRow> = controllers
        .iter()
        .map(|&c| {
            let mine: Vec<&RunOutcome> = outcomes.iter().filter(|o| o.controller == c).collect();
            let ok: Vec<&Metrics> = mine.iter().filter_map(|o| o.metrics.as_ref().ok()).collect();
            let mut mean = [f64::NAN; 5];
            let mut sd = [f64::NAN; 5];
            for i in 0..5 {
                let xs: Vec<f64> = ok.iter().map(|m| m.values()[i]).collect();
                (mean[i], sd[i]) = mean_sd(&xs);
            }
            let error = mine
                .iter()
                .find_map(|o| o.metrics.as_ref().err())
                .map(|e| e.to_string());
            ComparisonRow {
                controller: c.label().to_string(),
                runs: mine.len(),
                failed: mine.len() - ok.len(),
                mean,
                sd,
                normalized_objective: None,
                error,
            }
        })
        .collect();
    if let Some(reference) = rows
        .iter()
        .find(|r| r.controller == ControllerKind::Perfect.label())
        .map(|r| r.mean[0])
    {
        for r in &mut rows {
            r.normalized_objective = Some(r.mean[0] / reference);
        }
    }
    Ok(ComparisonTable { rows, outcomes })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub factor: usize,
    pub controller: String,
    pub nt: usize,
    /// Mean over seeds of the average objective.
    pub avg_objective: f64,
    /// Mean over seeds of the objective relative to the reference factor on
    /// the same seed.
    pub normalized: f64,
    pub failed: usize,
}

#[derive(Clone, Debug)]
pub struct SweepTable {
    /// Factor all ratios are relative to: 1 when present, else the smallest.
    pub reference_factor: usize,
    pub rows: Vec<SweepRow>,
    pub outcomes: Vec<(usize, RunOutcome)>,
}

impl SweepTable {
    /// Per-seed objective at `factor` divided by the reference factor's.
    pub fn ratio(&self, controller: ControllerKind, seed: u64, factor: usize) -> Option<f64> {
        let get = |f: usize| {
            self.outcomes
                .iter()
                .find(|(ff, o)| *ff == f && o.controller == controller && o.seed == seed)
                .and_then(|(_, o)| o.metrics.as_ref().ok())
                .map(|m| m.avg_objective)
        };
        Some(get(factor)? / get(self.reference_factor)?)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(r)?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        write_atomic(path, &bytes)
    }
}

/// Controllers compared in the training-horizon sweep.
pub const SWEEP_CONTROLLERS: [ControllerKind; 2] = [ControllerKind::Hybrid, ControllerKind::HybridFf];

/// Reruns the base scenario for the hybrid controllers with the training
/// horizon scaled by each factor.
pub fn sweep_training_horizon(base: &SimConfig, factors: &[usize], seeds: &[u64]) -> Result<SweepTable> {
    if factors.is_empty() || factors.contains(&0) {
        return input_err("sweep factors must be >= 1");
    }
    if seeds.is_empty() {
        return input_err("sweep needs at least one seed");
    }
    base.validate()?;
    let reference_factor = if factors.contains(&1) {
        1
    } else {
        *factors.iter().min().expect("non-empty")
    };
    let mut all = factors.to_vec();
    if !all.contains(&reference_factor) {
        all.push(reference_factor);
    }
    let mut outcomes = Vec::new();
    for &factor in &all {
        let mut cfg = base.clone();
        cfg.forecast.nt = base.forecast.nt * factor;
        let table = compare_controllers(&cfg, &SWEEP_CONTROLLERS, seeds)?;
        outcomes.extend(table.outcomes.into_iter().map(|o| (factor, o)));
    }
    let mut table = SweepTable {
        reference_factor,
        rows: Vec::new(),
        outcomes,
    };
    for &factor in factors {
        for controller in SWEEP_CONTROLLERS {
            let objectives: Vec<f64> = seeds
                .iter()
                .filter_map(|&s| {
                    table
                        .outcomes
                        .iter()
                        .find(|(f, o)| *f == factor && o.controller == controller && o.seed == s)
                        .and_then(|(_, o)| o.metrics.as_ref().ok())
                        .map(|m| m.avg_objective)
                })
                .collect();
            let ratios: Vec<f64> = seeds.iter().filter_map(|&s| table.ratio(controller, s, factor)).collect();
            table.rows.push(SweepRow {
                factor,
                controller: controller.label().to_string(),
                nt: base.forecast.nt * factor,
                avg_objective: mean_sd(&objectives).0,
                normalized: mean_sd(&ratios).0,
                failed: seeds.len() - objectives.len(),
            });
        }
    }
    Ok(table)
}
