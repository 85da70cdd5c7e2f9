use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::allocation::AssignmentMethod;
use crate::channel::{Topology, CELLS};
use crate::wmmse::WmmseSettings;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodChoice {
    GaleShapley,
    Transportation,
    Both,
}

impl MethodChoice {
    pub fn methods(self) -> Vec<AssignmentMethod> {
        match self {
            MethodChoice::GaleShapley => vec![AssignmentMethod::GaleShapley],
            MethodChoice::Transportation => vec![AssignmentMethod::Transportation],
            MethodChoice::Both => vec![AssignmentMethod::GaleShapley, AssignmentMethod::Transportation],
        }
    }

    /// Tag used in output file names.
    pub fn short_name(self) -> &'static str {
        match self {
            MethodChoice::GaleShapley => "gs",
            MethodChoice::Transportation => "tp",
            MethodChoice::Both => "both",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    Iterations,
    Snr,
    Users,
}

impl SweepKind {
    pub fn name(self) -> &'static str {
        match self {
            SweepKind::Iterations => "iterations",
            SweepKind::Snr => "snr",
            SweepKind::Users => "users",
        }
    }
}

/// Experiment description, loaded from JSON.
///
/// Sweep semantics:
/// - `iterations`: `sweep_values` are iteration indices (0 is the initial
///   point); one Monte Carlo run per entry of `snr_db`.
/// - `snr`: `sweep_values` are the SNR points in dB; `snr_db` is ignored.
/// - `users`: `sweep_values` are users per cell; crossed with `snr_db`.
///
/// SNR is `10 log10(p_max / σ²)` with `σ² = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Users per cell, `[I_k, I_j]`.
    pub users: [usize; CELLS],
    /// Dedicated subcarriers per cell, `[N, M]`.
    pub dedicated_subcarriers: [usize; CELLS],
    pub shared_subcarriers: usize,
    /// Transmit antennas at both base stations.
    pub tx_antennas: usize,
    /// Receive antennas at every user.
    pub rx_antennas: usize,
    pub snr_db: Vec<f64>,
    pub samples: usize,
    pub master_seed: u64,
    pub method: MethodChoice,
    /// Per-cell, per-user priorities; missing entries default to 1.
    pub weights: Option<[Vec<f64>; CELLS]>,
    pub wmmse: WmmseSettings,
    pub sweep: SweepKind,
    pub sweep_values: Vec<f64>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            users: [10, 10],
            dedicated_subcarriers: [3, 3],
            shared_subcarriers: 1,
            tx_antennas: 4,
            rx_antennas: 2,
            snr_db: vec![10.0],
            samples: 200,
            master_seed: 0,
            method: MethodChoice::Both,
            weights: None,
            wmmse: WmmseSettings::default(),
            sweep: SweepKind::Snr,
            sweep_values: vec![0.0, 5.0, 10.0, 15.0, 20.0],
        }
    }
}

/// One concrete operating point of an experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioPoint {
    pub topology: Topology,
    pub snr_db: f64,
}

impl ScenarioPoint {
    pub fn p_max(&self) -> f64 {
        10f64.powf(self.snr_db / 10.0)
    }
}

fn is_count(v: f64) -> bool {
    v.is_finite() && v >= 0.0 && v.fract() == 0.0
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    pub fn topology(&self, users: [usize; CELLS]) -> Topology {
        Topology {
            users_per_cell: users,
            tx_antennas: [self.tx_antennas; CELLS],
            rx_antennas: [self.rx_antennas; CELLS],
            dedicated_subcarriers: self.dedicated_subcarriers,
            shared_subcarriers: self.shared_subcarriers,
        }
    }

    /// Operating point at the configured user counts and `snr_db`.
    pub fn point(&self, snr_db: f64) -> ScenarioPoint {
        ScenarioPoint {
            topology: self.topology(self.users),
            snr_db,
        }
    }

    /// Priorities of `cell`'s users.
    pub fn priorities(&self, cell: usize, users: usize) -> Vec<f64> {
        let given = self.weights.as_ref().map_or(&[][..], |w| &w[cell][..]);
        (0..users).map(|u| given.get(u).copied().unwrap_or(1.0)).collect()
    }

    /// `(sweep_value, point)` pairs in evaluation order.
    pub fn grid(&self) -> Vec<(f64, ScenarioPoint)> {
        match self.sweep {
            SweepKind::Iterations => self.snr_db.iter().map(|&s| (s, self.point(s))).collect(),
            SweepKind::Snr => self.sweep_values.iter().map(|&s| (s, self.point(s))).collect(),
            SweepKind::Users => self
                .sweep_values
                .iter()
                .flat_map(|&v| {
                    self.snr_db.iter().map(move |&s| {
                        let n = v as usize;
                        (
                            v,
                            ScenarioPoint {
                                topology: self.topology([n; CELLS]),
                                snr_db: s,
                            },
                        )
                    })
                })
                .collect(),
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |msg: String| Err(HarnessError::Config(msg));
        if self.samples == 0 {
            return bad("samples must be at least 1".into());
        }
        if self.sweep_values.is_empty() {
            return bad("sweep_values must not be empty".into());
        }
        if self.sweep != SweepKind::Snr && self.snr_db.is_empty() {
            return bad("snr_db must not be empty".into());
        }
        if self.snr_db.iter().chain(&self.sweep_values).any(|v| !v.is_finite()) {
            return bad("snr_db and sweep_values must be finite".into());
        }
        match self.sweep {
            SweepKind::Iterations => {
                if let Some(v) = self.sweep_values.iter().find(|&&v| !is_count(v)) {
                    return bad(format!("iteration index {v} is not a non-negative integer"));
                }
            }
            SweepKind::Users => {
                if let Some(v) = self.sweep_values.iter().find(|&&v| !is_count(v) || v < 1.0) {
                    return bad(format!("user count {v} is not a positive integer"));
                }
            }
            SweepKind::Snr => {}
        }
        if let Some(w) = &self.weights {
            if w.iter().flatten().any(|&x| !(x >= 0.0 && x.is_finite())) {
                return bad("weights must be finite and non-negative".into());
            }
        }
        self.wmmse
            .validate()
            .map_err(|e| HarnessError::Config(e.to_string()))?;
        for (_, point) in self.grid() {
            point
                .topology
                .validate()
                .map_err(|e| HarnessError::Config(e.to_string()))?;
        }
        Ok(())
    }
}
