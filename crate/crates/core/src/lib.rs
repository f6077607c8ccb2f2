pub mod control;
pub mod error;
pub mod forecast;
pub mod gp;
pub mod harness;
pub mod plant;
pub mod scenario;

pub use error::{Error, Result};
