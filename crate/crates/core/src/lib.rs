//! Two-cell MIMO-OFDMA downlink with a shared subcarrier band.
//!
//! Users are matched to subcarriers per cell (stable matching or a
//! transportation LP), then precoders are optimised jointly across both
//! cells with weighted MMSE.

pub mod allocation;
pub mod channel;
pub mod harness;
pub mod linalg;
pub mod wmmse;

pub use allocation::{allocate_two_stage, Assignment, AssignmentMethod};
pub use channel::{build_channel_set, Band, ChannelSet, Topology};
pub use harness::{run_experiment, run_sample, MetricsTable, ScenarioConfig};
pub use linalg::ComplexMatrix;
pub use wmmse::{wmmse_solve, CellProblem, WmmseSettings};
