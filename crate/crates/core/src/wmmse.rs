//! Joint precoder/decoder design by weighted-MMSE block coordinate descent.
//!
//! With the subcarrier assignment fixed, each scheduled (user, subcarrier)
//! pair becomes a [`LinkState`] carrying its channel, precoder `T`, MMSE
//! decoder `U`, MSE weight `W` and rate. One [`CellProblem`] holds the links of
//! one base station together with its power budget.
//!
//! One iteration of [`wmmse_solve`]:
//! 1. `U <- (H T T^H H^H + J)^{-1} H T` for every link of both cells,
//! 2. `W <- E^{-1}` where `E` is the link's MSE matrix,
//! 3. per cell, the power multiplier `λ` is found by bisection and
//!    `T <- μ (A + λ I)^{-1} H^H U W`.
//!
//! `J` is the interference-plus-noise covariance seen by the link: the other
//! users on the same subcarrier of the same cell, plus, on a shared
//! subcarrier, every link the other base station schedules there.
//!
//! `A` for a subcarrier collects `μ H^H U W U^H H` over every receiver the
//! base station reaches on it: its own co-scheduled links (the link itself
//! included) and, on shared subcarriers, the other cell's links through their
//! cross channels. Given `U` and `W` the precoder subproblem is then solved
//! exactly, which makes the weighted sum rate non-decreasing over iterations.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::allocation::Assignment;
use crate::channel::{draw_rayleigh, Band, ChannelSet};
use crate::linalg::{
    cholesky, frob_norm_sq, gram_outer, hermitian_eigen, inverse, log2_det_hpd, matmul, matmul_ah_b,
    ComplexMatrix, LinalgError,
};

/// Eigenvalues of `A` below this fraction of the largest are treated as zero.
const NULL_SPACE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WmmseError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("cell {cell}: no power bracket after {steps} doublings")]
    BracketNotFound { cell: usize, steps: usize },
    #[error("cell {cell}, link {link}: shared-band link has no cross channel")]
    MissingCrossChannel { cell: usize, link: usize },
    #[error("missing channel for cell {cell}, user {user}, {band:?} subcarrier {subcarrier}")]
    MissingChannel {
        cell: usize,
        user: usize,
        band: Band,
        subcarrier: usize,
    },
    #[error("invalid settings: {0}")]
    InvalidSettings(String),
    #[error("inconsistent problem: {0}")]
    Inconsistent(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WmmseSettings {
    /// Stop once no link's `log2 det W` moves by more than this.
    pub epsilon: f64,
    pub max_iterations: usize,
    /// Allowed gap between a cell's transmit power and its budget.
    pub bisection_tolerance: f64,
    pub bisection_max_steps: usize,
}

impl Default for WmmseSettings {
    fn default() -> Self {
        Self {
            epsilon: 1e-4,
            max_iterations: 100,
            bisection_tolerance: 1e-10,
            bisection_max_steps: 200,
        }
    }
}

impl WmmseSettings {
    pub fn validate(&self) -> Result<(), WmmseError> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(WmmseError::InvalidSettings(format!(
                "epsilon must lie in (0, 1), got {}",
                self.epsilon
            )));
        }
        if !(self.bisection_tolerance > 0.0 && self.bisection_tolerance.is_finite()) {
            return Err(WmmseError::InvalidSettings(
                "bisection_tolerance must be positive".into(),
            ));
        }
        if self.max_iterations == 0 || self.bisection_max_steps == 0 {
            return Err(WmmseError::InvalidSettings(
                "iteration and step limits must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Transceiver state of one scheduled (user, subcarrier) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkState {
    pub user: usize,
    pub band: Band,
    pub subcarrier: usize,
    /// Serving base station to user, `N_R x N_T`.
    pub channel: ComplexMatrix,
    /// Other base station to user on a shared subcarrier.
    pub cross_channel: Option<ComplexMatrix>,
    /// `N_T x a`.
    pub precoder: ComplexMatrix,
    /// `N_R x a`.
    pub decoder: ComplexMatrix,
    /// `a x a`, Hermitian positive definite.
    pub weight: ComplexMatrix,
    /// Bits/s/Hz.
    pub rate: f64,
    pub priority: f64,
}

impl LinkState {
    /// A link with zero precoder and decoder and identity weight.
    pub fn new(
        user: usize,
        band: Band,
        subcarrier: usize,
        channel: ComplexMatrix,
        cross_channel: Option<ComplexMatrix>,
        streams: usize,
        priority: f64,
    ) -> Self {
        let (rx, tx) = channel.shape();
        Self {
            user,
            band,
            subcarrier,
            channel,
            cross_channel,
            precoder: ComplexMatrix::zeros(tx, streams),
            decoder: ComplexMatrix::zeros(rx, streams),
            weight: ComplexMatrix::identity(streams),
            rate: 0.0,
            priority,
        }
    }

    pub fn streams(&self) -> usize {
        self.precoder.cols()
    }
}

/// Links of one base station and its power budget.
#[derive(Debug, Clone, PartialEq)]
pub struct CellProblem {
    pub cell: usize,
    pub links: Vec<LinkState>,
    pub p_max: f64,
    pub noise_variance: f64,
    schedule: BTreeMap<(Band, usize), Vec<usize>>,
}

impl CellProblem {
    pub fn new(
        cell: usize,
        links: Vec<LinkState>,
        p_max: f64,
        noise_variance: f64,
    ) -> Result<Self, WmmseError> {
        if !(p_max >= 0.0 && p_max.is_finite()) {
            return Err(WmmseError::Inconsistent(format!("p_max must be >= 0, got {p_max}")));
        }
        if !(noise_variance > 0.0 && noise_variance.is_finite()) {
            return Err(WmmseError::Inconsistent(format!(
                "noise variance must be > 0, got {noise_variance}"
            )));
        }
        let mut schedule: BTreeMap<(Band, usize), Vec<usize>> = BTreeMap::new();
        let tx = links.first().map(|l| l.channel.cols());
        for (i, l) in links.iter().enumerate() {
            let (rx, t) = l.channel.shape();
            let a = l.streams();
            if Some(t) != tx
                || l.precoder.shape() != (t, a)
                || l.decoder.shape() != (rx, a)
                || l.weight.shape() != (a, a)
            {
                return Err(WmmseError::Inconsistent(format!("link {i} has mismatched shapes")));
            }
            if let Some(x) = &l.cross_channel {
                if x.rows() != rx {
                    return Err(WmmseError::Inconsistent(format!(
                        "link {i} cross channel has {} rows, expected {rx}",
                        x.rows()
                    )));
                }
            }
            if !(l.priority >= 0.0 && l.priority.is_finite()) {
                return Err(WmmseError::Inconsistent(format!("link {i} has invalid priority")));
            }
            schedule.entry((l.band, l.subcarrier)).or_default().push(i);
        }
        Ok(Self {
            cell,
            links,
            p_max,
            noise_variance,
            schedule,
        })
    }

    /// Builds the links of an assignment; `priorities[user]` sets `μ`.
    pub fn from_assignment(
        channels: &ChannelSet,
        assignment: &Assignment,
        p_max: f64,
        priorities: &[f64],
    ) -> Result<Self, WmmseError> {
        let cell = assignment.cell;
        let streams = channels.topology().rx_antennas[cell];
        let other = 1 - cell;
        let links = assignment
            .links()
            .map(|(band, subcarrier, user)| {
                let missing = WmmseError::MissingChannel {
                    cell,
                    user,
                    band,
                    subcarrier,
                };
                let channel = channels
                    .own(cell, user, band, subcarrier)
                    .ok_or(missing.clone())?
                    .clone();
                let cross = match band {
                    Band::Dedicated => None,
                    Band::Shared => Some(
                        channels
                            .get(cell, user, band, subcarrier, other)
                            .ok_or(missing)?
                            .clone(),
                    ),
                };
                let priority = priorities.get(user).copied().unwrap_or(1.0);
                Ok(LinkState::new(user, band, subcarrier, channel, cross, streams, priority))
            })
            .collect::<Result<Vec<_>, WmmseError>>()?;
        Self::new(cell, links, p_max, channels.noise_variance())
    }

    /// Indices of the links scheduled on `(band, subcarrier)`.
    pub fn co_scheduled(&self, band: Band, subcarrier: usize) -> &[usize] {
        self.schedule
            .get(&(band, subcarrier))
            .map_or(&[], Vec::as_slice)
    }

    pub fn total_power(&self) -> f64 {
        self.links.iter().map(|l| frob_norm_sq(&l.precoder)).sum()
    }

    /// Random Gaussian precoders, each scaled to `p_max / links` power.
    pub fn initialize_precoders<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        if self.links.is_empty() {
            return;
        }
        let share = self.p_max / self.links.len() as f64;
        for link in &mut self.links {
            let (tx, a) = link.precoder.shape();
            let g = draw_rayleigh(rng, tx, a);
            let norm = frob_norm_sq(&g);
            link.precoder = if share > 0.0 && norm > 0.0 {
                g.scale((share / norm).sqrt())
            } else {
                ComplexMatrix::zeros(tx, a)
            };
        }
    }

    /// Weighted sum of the stored link rates.
    pub fn weighted_rate(&self) -> f64 {
        self.links.iter().map(|l| l.priority * l.rate).sum()
    }
}

/// Interference-plus-noise covariance `J` at `cells[cell].links[link]`.
pub fn interference_plus_noise(
    cells: &[CellProblem],
    cell: usize,
    link: usize,
) -> Result<ComplexMatrix, WmmseError> {
    let problem = &cells[cell];
    let l = &problem.links[link];
    let rx = l.channel.rows();
    let mut j = ComplexMatrix::identity(rx).scale(problem.noise_variance);
    for &other in problem.co_scheduled(l.band, l.subcarrier) {
        if other == link {
            continue;
        }
        let ht = matmul(&l.channel, &problem.links[other].precoder)?;
        j.add_assign(&gram_outer(&ht))?;
    }
    if l.band == Band::Shared {
        for (pc, peer) in cells.iter().enumerate() {
            if pc == cell {
                continue;
            }
            let peers = peer.co_scheduled(Band::Shared, l.subcarrier);
            if peers.is_empty() {
                continue;
            }
            let cross = l
                .cross_channel
                .as_ref()
                .ok_or(WmmseError::MissingCrossChannel { cell, link })?;
            for &b in peers {
                let ht = matmul(cross, &peer.links[b].precoder)?;
                j.add_assign(&gram_outer(&ht))?;
            }
        }
    }
    Ok(j)
}

/// Linear MMSE decoder `(H T T^H H^H + J)^{-1} H T`.
pub fn mmse_receiver(link: &LinkState, j: &ComplexMatrix) -> Result<ComplexMatrix, WmmseError> {
    let ht = matmul(&link.channel, &link.precoder)?;
    let cov = gram_outer(&ht).add(j)?;
    Ok(matmul(&inverse(&cov)?, &ht)?)
}

/// MSE matrix `(I - U^H H T)(I - U^H H T)^H + U^H (J - σ² I) U + σ² U^H U`
/// for the link's current decoder.
pub fn mse_matrix(
    link: &LinkState,
    j: &ComplexMatrix,
    noise_variance: f64,
) -> Result<ComplexMatrix, WmmseError> {
    let a = link.streams();
    let ht = matmul(&link.channel, &link.precoder)?;
    let mut residual = ComplexMatrix::identity(a);
    residual = residual.sub(&matmul_ah_b(&link.decoder, &ht)?)?;
    let mut e = gram_outer(&residual);

    let mut interference = j.clone();
    interference.add_diagonal(-noise_variance);
    let uj = matmul_ah_b(&link.decoder, &interference)?;
    e.add_assign(&matmul(&uj, &link.decoder)?)?;
    let uu = matmul_ah_b(&link.decoder, &link.decoder)?;
    e.add_assign(&uu.scale(noise_variance))?;
    Ok(e.hermitian_part())
}

/// `I + T^H H^H J^{-1} H T`, the inverse MSE at the MMSE decoder.
fn information_matrix(link: &LinkState, j: &ComplexMatrix) -> Result<ComplexMatrix, WmmseError> {
    let ht = matmul(&link.channel, &link.precoder)?;
    let jinv = inverse(j)?;
    let mut m = matmul_ah_b(&ht, &matmul(&jinv, &ht)?)?;
    m.add_diagonal(1.0);
    Ok(m.hermitian_part())
}

/// MSE at the MMSE decoder, `(I + T^H H^H J^{-1} H T)^{-1}`.
pub fn mse_matrix_at_mmse(link: &LinkState, j: &ComplexMatrix) -> Result<ComplexMatrix, WmmseError> {
    Ok(inverse(&information_matrix(link, j)?)?.hermitian_part())
}

/// `W = E^{-1}`.
pub fn weight_update(e: &ComplexMatrix) -> Result<ComplexMatrix, WmmseError> {
    cholesky(e)?;
    Ok(inverse(e)?.hermitian_part())
}

/// `log2 det(I + T^H H^H J^{-1} H T)`, bits/s/Hz.
pub fn user_rate(link: &LinkState, j: &ComplexMatrix) -> Result<f64, WmmseError> {
    Ok(log2_det_hpd(&information_matrix(link, j)?)?.max(0.0))
}

/// Eigen-factored precoder subproblem of one cell.
///
/// For each subcarrier the cell transmits on, `A = V diag(d) V^H` and each
/// link's right-hand side is kept as `V^H μ H^H U W`, so both the precoders
/// and their total power are cheap to evaluate for any `λ`.
struct PrecoderSystem {
    groups: Vec<GroupFactor>,
}

struct GroupFactor {
    values: Vec<f64>,
    vectors: ComplexMatrix,
    cutoff: f64,
    rhs: Vec<(usize, ComplexMatrix)>,
}

impl PrecoderSystem {
    fn build(cells: &[CellProblem], cell: usize) -> Result<Self, WmmseError> {
        let problem = &cells[cell];
        let mut groups = Vec::with_capacity(problem.schedule.len());
        for (&(band, subcarrier), members) in &problem.schedule {
            let tx = problem.links[members[0]].channel.cols();
            let mut a = ComplexMatrix::zeros(tx, tx);
            let mut rhs_raw = Vec::with_capacity(members.len());
            for &i in members {
                let l = &problem.links[i];
                let k = matmul_ah_b(&l.channel, &l.decoder)?;
                accumulate_quadratic(&mut a, &k, &l.weight, l.priority)?;
                rhs_raw.push((i, matmul(&k, &l.weight)?.scale(l.priority)));
            }
            if band == Band::Shared {
                for (pc, peer) in cells.iter().enumerate() {
                    if pc == cell {
                        continue;
                    }
                    for &b in peer.co_scheduled(Band::Shared, subcarrier) {
                        let pl = &peer.links[b];
                        let cross = pl
                            .cross_channel
                            .as_ref()
                            .ok_or(WmmseError::MissingCrossChannel { cell: pc, link: b })?;
                        let k = matmul_ah_b(cross, &pl.decoder)?;
                        accumulate_quadratic(&mut a, &k, &pl.weight, pl.priority)?;
                    }
                }
            }
            let eig = hermitian_eigen(&a.hermitian_part())?;
            let top = eig.values.iter().copied().fold(0.0, f64::max);
            let cutoff = NULL_SPACE_TOL * top;
            let rhs = rhs_raw
                .into_iter()
                .map(|(i, b)| Ok((i, matmul_ah_b(&eig.vectors, &b)?)))
                .collect::<Result<Vec<_>, WmmseError>>()?;
            groups.push(GroupFactor {
                values: eig.values,
                vectors: eig.vectors,
                cutoff,
                rhs,
            });
        }
        Ok(Self { groups })
    }

    /// Total transmit power of `T(λ)`; zero for `λ = ∞`.
    fn power(&self, lambda: f64) -> f64 {
        if lambda.is_infinite() {
            return 0.0;
        }
        let mut total = 0.0;
        for g in &self.groups {
            for (_, c) in &g.rhs {
                for (i, &d) in g.values.iter().enumerate() {
                    if d <= g.cutoff {
                        continue;
                    }
                    let row: f64 = (0..c.cols()).map(|k| c[(i, k)].norm_sqr()).sum();
                    total += row / ((d + lambda) * (d + lambda));
                }
            }
        }
        total
    }

    fn precoders(&self, lambda: f64, links: usize) -> Vec<Option<ComplexMatrix>> {
        let mut out = vec![None; links];
        for g in &self.groups {
            for (i, c) in &g.rhs {
                let mut scaled = ComplexMatrix::zeros(c.rows(), c.cols());
                if lambda.is_finite() {
                    for (r, &d) in g.values.iter().enumerate() {
                        if d <= g.cutoff {
                            continue;
                        }
                        let f = 1.0 / (d + lambda);
                        for k in 0..c.cols() {
                            scaled[(r, k)] = c[(r, k)] * f;
                        }
                    }
                }
                out[*i] = Some(matmul(&g.vectors, &scaled).expect("conforming shapes"));
            }
        }
        out
    }
}

/// `a += μ K W K^H`.
fn accumulate_quadratic(
    a: &mut ComplexMatrix,
    k: &ComplexMatrix,
    w: &ComplexMatrix,
    mu: f64,
) -> Result<(), WmmseError> {
    if mu == 0.0 {
        return Ok(());
    }
    let kw = matmul(k, w)?;
    let n = a.rows();
    for r in 0..n {
        for c in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for s in 0..kw.cols() {
                acc += kw[(r, s)] * k[(c, s)].conj();
            }
            a[(r, c)] += acc * mu;
        }
    }
    Ok(())
}

/// Precoders `T(λ) = μ (A + λ I)^{-1} H^H U W` for every link of `cell`,
/// in link order. `λ = ∞` yields zero precoders.
///
/// Directions in the null space of `A` get no power; the right-hand side has
/// no component there, so at `λ = 0` this is the minimum-norm solution.
pub fn precoder_update(
    cells: &[CellProblem],
    cell: usize,
    lambda: f64,
) -> Result<Vec<ComplexMatrix>, WmmseError> {
    if lambda.is_nan() || lambda < 0.0 {
        return Err(WmmseError::InvalidSettings(format!("lambda must be >= 0, got {lambda}")));
    }
    let system = PrecoderSystem::build(cells, cell)?;
    Ok(collect_precoders(&system, &cells[cell], lambda))
}

fn collect_precoders(system: &PrecoderSystem, problem: &CellProblem, lambda: f64) -> Vec<ComplexMatrix> {
    system
        .precoders(lambda, problem.links.len())
        .into_iter()
        .zip(&problem.links)
        .map(|(t, l)| t.unwrap_or_else(|| ComplexMatrix::zeros(l.precoder.rows(), l.precoder.cols())))
        .collect()
}

/// Power multiplier of `cell` for the current decoders and weights.
///
/// Returns 0 when the unconstrained precoders fit the budget. Otherwise
/// doubles an upper bracket from 1 until the power drops below `p_max`, then
/// bisects. The returned value is always the upper end of the bracket, so
/// the resulting power never exceeds the budget.
pub fn bisect_power(
    cells: &[CellProblem],
    cell: usize,
    settings: &WmmseSettings,
) -> Result<f64, WmmseError> {
    let system = PrecoderSystem::build(cells, cell)?;
    bisect_system(&system, cells[cell].p_max, cell, settings)
}

fn bisect_system(
    system: &PrecoderSystem,
    p_max: f64,
    cell: usize,
    settings: &WmmseSettings,
) -> Result<f64, WmmseError> {
    if system.power(0.0) <= p_max {
        return Ok(0.0);
    }
    if p_max <= 0.0 {
        return Ok(f64::INFINITY);
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    let mut doublings = 0;
    while system.power(hi) > p_max {
        lo = hi;
        hi *= 2.0;
        doublings += 1;
        if doublings > settings.bisection_max_steps || !hi.is_finite() {
            return Err(WmmseError::BracketNotFound {
                cell,
                steps: doublings,
            });
        }
    }
    for _ in 0..settings.bisection_max_steps {
        if p_max - system.power(hi) <= settings.bisection_tolerance {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if system.power(mid) > p_max {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// Outcome of [`wmmse_solve`].
#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    /// Weighted sum rate of both cells; entry 0 is the initial point.
    pub wsr_trace: Vec<f64>,
    /// `Σ μ [Tr(W E) - log2 det W]` at the start of each iteration.
    pub objective_trace: Vec<f64>,
    /// Largest per-cell `Σ ||T||² - p_max` seen after each precoder update.
    pub power_excess: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl SolveReport {
    pub fn final_wsr(&self) -> f64 {
        *self.wsr_trace.last().expect("trace holds the initial point")
    }
}

/// Recomputes `U`, `W` and the rate of every link at the current precoders.
/// Returns `(wsr, wmse objective, log2 det W per link)`.
fn refresh_receivers(cells: &mut [CellProblem]) -> Result<(f64, f64, Vec<Vec<f64>>), WmmseError> {
    let mut wsr = 0.0;
    let mut objective = 0.0;
    let mut log_dets = Vec::with_capacity(cells.len());
    for c in 0..cells.len() {
        let mut cell_dets = Vec::with_capacity(cells[c].links.len());
        for i in 0..cells[c].links.len() {
            let j = interference_plus_noise(cells, c, i)?;
            let noise = cells[c].noise_variance;
            let link = &cells[c].links[i];
            let u = mmse_receiver(link, &j)?;
            let rate = user_rate(link, &j)?;
            let link = &mut cells[c].links[i];
            link.decoder = u;
            let e = mse_matrix(link, &j, noise)?;
            let w = weight_update(&e)?;
            let log_det_w = log2_det_hpd(&w)?;
            objective += link.priority * (matmul(&w, &e)?.trace().re - log_det_w);
            link.weight = w;
            link.rate = rate;
            wsr += link.priority * rate;
            cell_dets.push(log_det_w);
        }
        log_dets.push(cell_dets);
    }
    Ok((wsr, objective, log_dets))
}

/// Runs WMMSE on all cells jointly from their current precoders.
///
/// Stops when no link's `log2 det W` changes by more than `epsilon` between
/// iterations, or after `max_iterations`; the latter is reported through
/// [`SolveReport::converged`], not as an error.
pub fn wmmse_solve(cells: &mut [CellProblem], settings: &WmmseSettings) -> Result<SolveReport, WmmseError> {
    settings.validate()?;
    let (wsr, objective, mut previous) = refresh_receivers(cells)?;
    let mut report = SolveReport {
        wsr_trace: vec![wsr],
        objective_trace: vec![objective],
        power_excess: Vec::new(),
        iterations: 0,
        converged: false,
    };

    for iteration in 1..=settings.max_iterations {
        // Given U and W the precoder subproblem separates per cell.
        let mut updates = Vec::with_capacity(cells.len());
        for c in 0..cells.len() {
            if cells[c].links.is_empty() {
                updates.push(Vec::new());
                continue;
            }
            let system = PrecoderSystem::build(cells, c)?;
            let lambda = bisect_system(&system, cells[c].p_max, c, settings)?;
            updates.push(collect_precoders(&system, &cells[c], lambda));
        }
        let mut excess = f64::NEG_INFINITY;
        for (problem, update) in cells.iter_mut().zip(updates) {
            for (link, t) in problem.links.iter_mut().zip(update) {
                link.precoder = t;
            }
            if !problem.links.is_empty() {
                excess = excess.max(problem.total_power() - problem.p_max);
            }
        }
        report.power_excess.push(excess);

        let (wsr, objective, log_dets) = refresh_receivers(cells)?;
        report.wsr_trace.push(wsr);
        report.objective_trace.push(objective);
        report.iterations = iteration;

        let change = log_dets
            .iter()
            .flatten()
            .zip(previous.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        previous = log_dets;
        if change <= settings.epsilon {
            report.converged = true;
            break;
        }
    }
    Ok(report)
}
