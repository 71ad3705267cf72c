//! Scenario runner for `gradflow`: TOML configs in, CSV traces and a JSON
//! summary out.

pub mod artifacts;
pub mod config;
pub mod error;
pub mod params;
pub mod registry;
pub mod run;
pub mod trace;

pub use config::{load_config, load_config_str, Kind, Scenario};
pub use error::{HarnessError, Result};
pub use run::{run_all, run_scenario, Monitor, Outcome, ScenarioResult, Summary};
pub use trace::{diagnose, parse_trace, RateReport, Trace};
