use log::{info, warn};
use rayon::prelude::*;

use super::config::{ScenarioConfig, ScenarioPoint, SweepKind};
use super::report::{MetricRow, MetricsTable};
use super::HarnessError;
use crate::allocation::{allocate_two_stage, AssignmentMethod};
use crate::channel::{build_channel_set, substream, CELLS};
use crate::wmmse::{wmmse_solve, CellProblem};

/// Noise variance of every receiver; SNR is set through `p_max`.
pub const NOISE_VARIANCE: f64 = 1.0;

/// Substream tag for precoder initialisation.
const INIT_TAG: u64 = 0x1A17;

/// Result of one Monte Carlo sample.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleOutcome {
    pub wsr_trace: Vec<f64>,
    pub final_wsr: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Largest `Σ ||T||² - p_max` over iterations and cells.
    pub max_power_excess: f64,
    pub matched: [usize; CELLS],
    pub unmatched: [usize; CELLS],
}

impl SampleOutcome {
    /// WSR after `iteration` iterations, holding the last value once converged.
    pub fn wsr_at(&self, iteration: usize) -> f64 {
        self.wsr_trace[iteration.min(self.wsr_trace.len() - 1)]
    }
}

/// Allocates both cells and runs WMMSE for one channel draw.
pub fn run_sample(
    config: &ScenarioConfig,
    point: &ScenarioPoint,
    sample_index: u64,
    method: AssignmentMethod,
) -> Result<SampleOutcome, HarnessError> {
    let topo = &point.topology;
    let channels = build_channel_set(topo, NOISE_VARIANCE, config.master_seed, sample_index)?;
    let p_max = point.p_max();

    let mut cells = Vec::with_capacity(CELLS);
    let mut matched = [0; CELLS];
    let mut unmatched = [0; CELLS];
    for cell in 0..CELLS {
        let assignment = allocate_two_stage(&channels, cell, method, topo.tx_antennas[cell])?;
        matched[cell] = assignment.matched();
        unmatched[cell] = assignment.unmatched.len();
        let priorities = config.priorities(cell, topo.users_per_cell[cell]);
        let mut problem = CellProblem::from_assignment(&channels, &assignment, p_max, &priorities)?;
        let mut rng = substream(config.master_seed, &[sample_index, INIT_TAG, cell as u64]);
        problem.initialize_precoders(&mut rng);
        cells.push(problem);
    }

    let report = wmmse_solve(&mut cells, &config.wmmse)?;
    let max_power_excess = report
        .power_excess
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(SampleOutcome {
        final_wsr: report.final_wsr(),
        wsr_trace: report.wsr_trace,
        iterations: report.iterations,
        converged: report.converged,
        max_power_excess,
        matched,
        unmatched,
    })
}

/// Mean and standard error of the mean.
pub fn mean_and_std_error(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Runs all samples of one point; failed samples are logged and dropped.
fn run_point(
    config: &ScenarioConfig,
    point: &ScenarioPoint,
    method: AssignmentMethod,
) -> (Vec<SampleOutcome>, usize) {
    let results: Vec<_> = (0..config.samples as u64)
        .into_par_iter()
        .map(|s| (s, run_sample(config, point, s, method)))
        .collect();
    let mut ok = Vec::with_capacity(results.len());
    let mut failed = 0;
    for (s, r) in results {
        match r {
            Ok(o) => ok.push(o),
            Err(e) => {
                warn!(
                    "sample {s} at {} dB with {} users ({}) failed: {e}",
                    point.snr_db,
                    point.topology.users_per_cell[0],
                    method.name()
                );
                failed += 1;
            }
        }
    }
    (ok, failed)
}

fn row(
    method: AssignmentMethod,
    sweep: SweepKind,
    sweep_value: f64,
    snr_db: f64,
    values: &[f64],
    iterations: &[usize],
) -> MetricRow {
    let (mean_wsr, std_error) = mean_and_std_error(values);
    let mean_iters = iterations.iter().sum::<usize>() as f64 / iterations.len().max(1) as f64;
    MetricRow {
        method,
        sweep,
        sweep_value,
        snr_db,
        mean_wsr,
        std_error,
        samples: values.len(),
        mean_iters,
    }
}

/// Runs the full Monte Carlo experiment described by `config`.
///
/// Fails with [`HarnessError::TooManyFailures`] if more than 1% of all
/// sample runs error out.
pub fn run_experiment(config: &ScenarioConfig) -> Result<MetricsTable, HarnessError> {
    config.validate()?;
    let mut rows = Vec::new();
    let mut attempted = 0;
    let mut failed = 0;
    for method in config.method.methods() {
        for (sweep_value, point) in config.grid() {
            info!(
                "{}: {} = {sweep_value}, {} dB",
                method.name(),
                config.sweep.name(),
                point.snr_db
            );
            let (outcomes, lost) = run_point(config, &point, method);
            attempted += config.samples;
            failed += lost;
            let iterations: Vec<usize> = outcomes.iter().map(|o| o.iterations).collect();
            match config.sweep {
                SweepKind::Iterations => {
                    for &v in &config.sweep_values {
                        let values: Vec<f64> = outcomes.iter().map(|o| o.wsr_at(v as usize)).collect();
                        rows.push(row(method, config.sweep, v, point.snr_db, &values, &iterations));
                    }
                }
                SweepKind::Snr | SweepKind::Users => {
                    let values: Vec<f64> = outcomes.iter().map(|o| o.final_wsr).collect();
                    rows.push(row(method, config.sweep, sweep_value, point.snr_db, &values, &iterations));
                }
            }
        }
    }
    if failed * 100 > attempted {
        return Err(HarnessError::TooManyFailures { failed, attempted });
    }
    Ok(MetricsTable::new(rows))
}
