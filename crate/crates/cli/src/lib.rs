//! Batch front-end: configurations in, CSV time series and SVG charts out.

pub mod commands;
pub mod config;
pub mod error;
pub mod run;
pub mod series;
pub mod svg;

pub use commands::Format;
pub use config::{parse_config, parse_config_with, Engine, Observable, Overrides, RunConfig};
pub use error::{CliError, Result};
pub use run::{run, run_sweep, RunOutput};
pub use series::Series;
