//! Forecasts 50 s of a noisy sinusoid with the kernel-composition method and
//! with the direct auto-regressive models, and prints both envelopes next to
//! the truth.

use hybrid_rempc::forecast::{envelope_from_posterior, kc_forecast, nar_forecast, ConfidenceSpec, ForecastConfig};
use hybrid_rempc::gp::GpDataset;
use hybrid_rempc::scenario::{generate, ScenarioKind, ScenarioSpec};

fn main() -> hybrid_rempc::Result<()> {
    let cfg = ForecastConfig::default();
    let spec = ScenarioSpec {
        kind: ScenarioKind::Sn,
        start_time: -200.0,
        end_time: 60.0,
        ..ScenarioSpec::default()
    };
    let trace = generate(&spec)?;
    let now = trace.position(0.0, 1e-9).expect("trace covers t = 0");
    let n = cfg.required_history_len();
    let times = &trace.times[now + 1 - n..=now];
    let values = &trace.measured_values[now + 1 - n..=now];

    let conf = ConfidenceSpec::new(cfg.beta)?;
    let kc = kc_forecast(&GpDataset::time_series(times, values)?, &cfg, None, 1)?;
    let nar = nar_forecast(values, 0.0, &cfg, None, 1)?;
    let kc_env = envelope_from_posterior(&kc.posterior, conf);
    let nar_env = envelope_from_posterior(&nar.posterior, conf);

    println!("    t   truth |        KC interval |       NAR interval");
    for i in (0..cfg.np).step_by(3) {
        println!(
            "{:>5} {:>7.2} | [{:>7.2}, {:>7.2}] | [{:>7.2}, {:>7.2}]",
            kc_env.step_times[i],
            trace.true_values[now + 1 + i],
            kc_env.lower[i],
            kc_env.upper[i],
            nar_env.lower[i],
            nar_env.upper[i]
        );
    }
    println!("KC hyperparameters: {:?}", kc.training.hyperparameters.kernel);
    Ok(())
}
