//! Scenario-driven runs: configuration, execution, CSV and SVG output.

pub mod plot;
pub mod run;
pub mod scenario;
pub mod table;

pub use plot::{emit_plot, Chart, Series};
pub use run::{provenance, run, Provenance, RunOptions, RunReport};
pub use scenario::{parse_scenario, Analysis, Scenario, SCHEMA_VERSION};
pub use table::{emit_csv, Cell, Table};
