//! Robust economic MPC for the tank heater: worst-case disturbance
//! selection, the soft-constrained objective and its minimization.

mod config;
mod objective;
mod solver;

pub use config::ControlConfig;
pub use objective::{evaluate_objective, violation_cost, worst_case_sequence, DisturbanceMode, ObjectiveValue};
pub use solver::{solve_for_disturbance, solve_rempc, ControlSolution};
