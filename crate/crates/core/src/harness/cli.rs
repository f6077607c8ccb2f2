//! Command-line front end: `simulate`, `compare`, `sweep` and `forecast`.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use super::compare::{compare_controllers, sweep_training_horizon};
use super::config::{ControllerKind, SimConfig};
use super::output::{write_atomic, write_metrics_json, write_run_csv};
use super::run::run_closed_loop;
use crate::error::{Error, Result};
use crate::forecast::{
    envelope_from_posterior, hybrid_forecast, kc_forecast, nar_forecast, ConfidenceSpec, Envelope, HybridState,
};
use crate::gp::GpDataset;
use crate::scenario::ScenarioKind;

#[derive(Parser, Debug)]
#[command(name = "rempc", version, about = "Closed-loop simulator for GP-forecast robust economic MPC")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one controller on one scenario; writes run.csv and metrics.json.
    Simulate(Common),
    /// Run several controllers on shared realizations; writes table.csv.
    Compare {
        #[command(flatten)]
        common: Common,
        /// Comma-separated seeds (overrides --seed).
        #[arg(long, value_delimiter = ',')]
        seeds: Vec<u64>,
        /// Comma-separated controllers; defaults to all seven.
        #[arg(long, value_delimiter = ',', value_parser = parse_controller)]
        controllers: Vec<ControllerKind>,
    },
    /// Scale the training horizon for the hybrid controllers; writes sweep.csv.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',')]
        seeds: Vec<u64>,
        /// Comma-separated training-horizon factors.
        #[arg(long, value_delimiter = ',', default_value = "1,2,3,4")]
        factors: Vec<usize>,
    },
    /// Forecast a single-column series of measurements; writes forecast.csv.
    Forecast {
        #[command(flatten)]
        common: Common,
        /// CSV file with one value per row, optionally under a header.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "hybrid")]
        method: ForecastMethod,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// JSON file with a full or partial simulation config.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (created if missing).
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[arg(long, value_parser = parse_scenario)]
    scenario: Option<ScenarioKind>,
    #[arg(long, value_parser = parse_controller)]
    controller: Option<ControllerKind>,
    /// Closed-loop span, seconds.
    #[arg(long)]
    duration: Option<f64>,
    /// Record wall-clock solve times in run.csv.
    #[arg(long)]
    timing: bool,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum ForecastMethod {
    Kc,
    Kcff,
    Nar,
    Hybrid,
    Hybridff,
}

fn parse_controller(s: &str) -> std::result::Result<ControllerKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_scenario(s: &str) -> std::result::Result<ScenarioKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

impl Common {
    fn resolve(&self) -> Result<SimConfig> {
        let mut cfg = match &self.config {
            Some(p) => SimConfig::from_json_file(p)?,
            None => SimConfig::default(),
        };
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(k) = self.scenario {
            cfg.scenario.kind = k;
        }
        if let Some(c) = self.controller {
            cfg.controller = c;
        }
        if let Some(d) = self.duration {
            cfg.duration = d;
        }
        if self.timing {
            cfg.record_timing = true;
        }
        cfg.output_dir = Some(self.out.clone());
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Parses `argv` (program name first) and runs the command. Returns the
/// process exit code: 0 on success, 1 for usage or configuration errors,
/// 2 for failures while running.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) => 1,
                _ => 2,
            }
        }
    }
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(common) => {
            let cfg = common.resolve()?;
            let out = prepare_out(&common.out)?;
            let record = run_closed_loop(&cfg)?;
            write_run_csv(&out.join("run.csv"), &record.rows)?;
            write_metrics_json(&out.join("metrics.json"), &record.metrics)?;
            write_atomic(&out.join("config.json"), serde_json::to_string_pretty(&cfg)?.as_bytes())?;
            eprintln!(
                "{} on {}: avg objective {:.4}, violation {:.3} °C·s, energy {:.1} kJ",
                cfg.controller, cfg.scenario.kind, record.metrics.avg_objective,
                record.metrics.violation_degree_seconds, record.metrics.total_heater_energy
            );
            Ok(())
        }
        Command::Compare {
            common,
            seeds,
            controllers,
        } => {
            let cfg = common.resolve()?;
            let out = prepare_out(&common.out)?;
            let seeds = if seeds.is_empty() { vec![cfg.seed] } else { seeds };
            let controllers = if controllers.is_empty() {
                ControllerKind::LINEUP.to_vec()
            } else {
                controllers
            };
            let table = compare_controllers(&cfg, &controllers, &seeds)?;
            table.write_csv(&out.join("table.csv"))?;
            for r in &table.rows {
                eprintln!(
                    "{:<11} objective {:>9.4} ± {:<8.4} normalized {}",
                    r.controller,
                    r.mean[0],
                    r.sd[0],
                    r.normalized_objective.map(|v| format!("{v:.3}")).unwrap_or_else(|| "-".into())
                );
            }
            Ok(())
        }
        Command::Sweep { common, seeds, factors } => {
            let mut cfg = common.resolve()?;
            if common.scenario.is_none() && common.config.is_none() {
                cfg.scenario.kind = ScenarioKind::Cm;
            }
            let out = prepare_out(&common.out)?;
            let seeds = if seeds.is_empty() { vec![cfg.seed] } else { seeds };
            let table = sweep_training_horizon(&cfg, &factors, &seeds).map_err(|e| match e {
                Error::Input(m) => Error::Config(m),
                other => other,
            })?;
            table.write_csv(&out.join("sweep.csv"))?;
            for r in &table.rows {
                eprintln!("factor {} {:<9} normalized {:.3}", r.factor, r.controller, r.normalized);
            }
            Ok(())
        }
        Command::Forecast { common, input, method } => {
            let cfg = common.resolve()?;
            let out = prepare_out(&common.out)?;
            let values = read_series(&input)?;
            let env = forecast_series(&cfg, &values, method)?;
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["t", "lower", "mean", "upper", "variance", "method"])?;
            for i in 0..env.0.len() {
                w.write_record([
                    env.0.step_times[i].to_string(),
                    env.0.lower[i].to_string(),
                    env.0.mean[i].to_string(),
                    env.0.upper[i].to_string(),
                    env.0.variance[i].to_string(),
                    env.1.to_string(),
                ])?;
            }
            let bytes = w.into_inner().map_err(|e| e.into_error())?;
            write_atomic(&out.join("forecast.csv"), &bytes)
        }
    }
}

fn prepare_out(dir: &Path) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    Ok(dir.to_path_buf())
}

/// Reads the first column of a CSV, skipping a non-numeric header line.
fn read_series(path: &Path) -> Result<Vec<f64>> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut values = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let Some(field) = rec.get(0) else { continue };
        match field.parse::<f64>() {
            Ok(v) if v.is_finite() => values.push(v),
            _ if i == 0 => continue,
            _ => return Err(Error::Input(format!("row {}: '{field}' is not a number", i + 1))),
        }
    }
    Ok(values)
}

/// Forecasts the samples after `values`, taken at the configured sample
/// period with the last one at t = 0.
fn forecast_series(cfg: &SimConfig, values: &[f64], method: ForecastMethod) -> Result<(Envelope, &'static str)> {
    let t_s = cfg.forecast.sample_period;
    let n = values.len();
    let times: Vec<f64> = (0..n).map(|i| (i as f64 - (n as f64 - 1.0)) * t_s).collect();
    let spec = ConfidenceSpec::new(cfg.forecast.beta)?;
    let mut fcfg = cfg.forecast.clone();
    if matches!(method, ForecastMethod::Kcff | ForecastMethod::Hybridff) {
        fcfg.forgetting = Some(cfg.forgetting);
    }
    let history = GpDataset::time_series(&times, values)?;
    Ok(match method {
        ForecastMethod::Kc | ForecastMethod::Kcff => {
            let f = kc_forecast(&history, &fcfg, None, cfg.seed)?;
            (envelope_from_posterior(&f.posterior, spec), "KC")
        }
        ForecastMethod::Nar => {
            let f = nar_forecast(values, 0.0, &fcfg, None, cfg.seed)?;
            (envelope_from_posterior(&f.posterior, spec), "NAR")
        }
        ForecastMethod::Hybrid | ForecastMethod::Hybridff => {
            let mut state = HybridState::new(cfg.delta1, cfg.delta2, cfg.seed)?;
            state.ratio_as_printed = cfg.ratio_as_printed;
            let f = hybrid_forecast(&history, &fcfg, &state)?;
            (f.envelope, f.decision.choice.as_str())
        }
    })
}
