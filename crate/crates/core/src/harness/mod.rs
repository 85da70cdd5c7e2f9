//! Scenario configuration, Monte Carlo driver and result artefacts.

mod config;
mod experiment;
mod report;

pub use config::{MethodChoice, ScenarioConfig, ScenarioPoint, SweepKind};
pub use experiment::{mean_and_std_error, run_experiment, run_sample, SampleOutcome, NOISE_VARIANCE};
pub use report::{
    emit_csv, emit_plot, plot_ranges, plot_series, read_csv, render_svg, round_sig6, write_csv, MetricRow,
    MetricsTable, Series, CSV_HEADER,
};

use thiserror::Error;

use crate::allocation::AllocationError;
use crate::channel::TopologyError;
use crate::wmmse::WmmseError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Allocation(#[from] AllocationError),
    #[error(transparent)]
    Wmmse(#[from] WmmseError),
    #[error("{failed} of {attempted} samples failed")]
    TooManyFailures { failed: usize, attempted: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
