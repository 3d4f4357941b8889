//! Scenario configuration, experiment execution and artifact emission.

pub mod config;
pub mod plot;
pub mod runner;
pub mod selftest;

pub use config::{builtin_or_custom, Algorithm, AlgorithmSpec, Sampling, ScenarioConfig};
pub use plot::{emit_plot, emit_waveform_plot, MseColumn};
pub use runner::{read_table_csv, run_fig3, run_scenario, write_table_csv, Fig3Result, ResultRow, ScenarioResult};
