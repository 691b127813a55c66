//! Numerical toolkit for a model of AI-mediated administrative compliance
//! under political turnover: within-form and overt failure channels,
//! threshold solvers, adoption and repair optimization, and a Monte Carlo
//! check of the Poisson benchmark.

pub mod adoption;
pub mod checks;
pub mod error;
pub mod families;
pub mod figures;
pub mod microsim;
pub mod model;
pub mod repair;
pub mod scenario;
pub mod solve;
pub mod sweep;
pub mod thresholds;

pub use error::{ModelError, Result};
pub use scenario::{load_scenario, Scenario};
