//! Disturbance forecasting: kernel composition, direct auto-regressive
//! models, envelope extraction and the hybrid switching forecaster.

pub mod confidence;
pub mod config;
pub mod envelope;
pub mod kc;
pub mod nar;
pub mod switching;

pub use confidence::{critical_value, ConfidenceSpec};
pub use config::ForecastConfig;
pub use envelope::{envelope_from_posterior, Envelope};
pub use kc::{kc_forecast, KcForecast};
pub use nar::{build_lag_matrix, nar_forecast, NarForecast};
pub use switching::{hybrid_forecast, switch_decide, HybridForecast, HybridState, Method, SwitchDecision};
