//! Experiment configuration, seed batches, persistence and table output.

pub mod batch;
pub mod config;
pub mod report;

pub use batch::{run_batch, run_seed, Aggregate, BatchError, BatchReport, BatchSummary, Stat};
pub use config::{ConfigError, ExperimentConfig};
pub use report::{emit_tables, load_summaries, ReportError, Tables};
