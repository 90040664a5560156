//! Benchmark harness for the hybrid planner and its baselines on the routing
//! domain: configuration, value-table files, parallel episode runs, CSV
//! output and aggregate reports.

pub mod config;
pub mod output;
pub mod report;
pub mod runner;
pub mod table_io;

pub use config::{Algorithm, BenchConfig, ConfigError, EpisodeSet};
pub use report::{aggregate, compare_sets, paired_sign_test, sign_test, AggregateReport, SetComparison, SignTest};
pub use runner::{Bench, EpisodeRow, EpisodeRun};
