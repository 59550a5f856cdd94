//! Command-line front end: JSON run configs, subcommand dispatch and
//! deterministic CSV, JSON and SVG outputs.

pub mod config;
pub mod plot;
pub mod run;

pub use config::{parse_config, parse_str, Command, ConfigError, Overrides, RunConfig};
pub use plot::{emit_plot, LogLogPlot, PlotError};
pub use run::{dispatch, Outcome, RunError, EXIT_CONFIG, EXIT_OK, EXIT_UNDEFINED};
