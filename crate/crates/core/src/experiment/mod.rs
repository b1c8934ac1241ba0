//! Config-driven experiments: Monte Carlo sweeps, coverage maps, analytic
//! reference curves, CSV and SVG emission, and a fast self-test.

pub mod config;
pub mod coverage;
pub mod curves;
pub mod plot;
pub mod runner;
pub mod selftest;
pub mod table;

pub use config::{
    config_hash, load_config, parse_config, CodeConfig, CodeFamily, ExperimentConfig, FrameConfig,
    PlacementKind, RunConfig, ScenarioConfig, SweepAxis, TagConfig,
};
pub use coverage::{
    load_coverage_config, parse_coverage_config, run_coverage_map, CoverageCell, CoverageConfig,
    CoverageTable, GridSpec, COVERAGE_CSV_HEADER,
};
pub use curves::{analytic_curves, phase_ignoring_pe, ANALYTIC_CSV_HEADER};
pub use plot::{render_coverage_map, render_rate_plot, PlotMetric};
pub use runner::{run_experiment, Counts, RunOptions};
pub use selftest::{run_selftest, SelfTestReport};
pub use table::{ResultRow, ResultTable, CSV_HEADER};
